"""Runs the CLI on a small synthetic panel and validates report.json against the schema."""

import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema


def main() -> int:
    cli, source_dir, work = sys.argv[1], pathlib.Path(sys.argv[2]), pathlib.Path(sys.argv[3])
    shutil.rmtree(work, ignore_errors=True)
    work.mkdir(parents=True)
    config = {
        "schema_version": 1,
        "input_path": "panel.csv",
        "output_dir": "out",
        "families": ["arima", "grnn", "gmdh", "rf"],
        "grids": {"grnn": {"sigma": [0.3, 0.5]}, "rf": {"n_estimators": [5], "max_depth": [4]}},
        "synth": [
            {"kind": "atm_like", "id": "atm", "length": 300, "seed": 8, "copies": 3},
            {"kind": "atm_like", "id": "gappy", "length": 300, "seed": 9, "parameters": {"missing": 150}},
        ],
    }
    cfg_path = work / "config.json"
    cfg_path.write_text(json.dumps(config))
    for verb in ("synth", "run"):
        subprocess.run([cli, verb, "--config", str(cfg_path)], check=True)

    schema = json.loads((source_dir / "schemas" / "report.schema.json").read_text())
    report = json.loads((work / "out" / "report" / "report.json").read_text())
    jsonschema.Draft202012Validator.check_schema(schema)
    errors = sorted(jsonschema.Draft202012Validator(schema).iter_errors(report), key=lambda e: list(e.path))
    for e in errors:
        print(f"{'/'.join(map(str, e.path))}: {e.message}")
    if errors:
        return 1
    if len(report["analysis"]["series"]) != 3 or len(report["analysis"]["filtered"]) != 1:
        print("unexpected series counts")
        return 1
    print(f"report.json valid ({len(report['leaderboards'])} leaderboard entries)")
    return 0


if __name__ == "__main__":
    sys.exit(main())
