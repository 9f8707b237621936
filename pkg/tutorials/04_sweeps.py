"""Run the sweep specs in specs/ and write CSV files next to them."""

import pathlib

from gaussqfim import specio
from gaussqfim.cli import run_sweep

here = pathlib.Path(__file__).parent
for path in sorted((here / "specs").glob("sweep_*.json")):
    header, rows, failures = run_sweep(specio.parse_sweep_spec(path.read_text()))
    out = path.with_suffix(".csv")
    out.write_text(specio.csv_text(header, rows))
    print(f"{path.name}: {len(rows)} rows, {failures} failed -> {out.name}")
