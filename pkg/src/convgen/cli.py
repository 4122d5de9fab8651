"""Command line front end: `bench run`, `bench pca`, `bench report`."""

from __future__ import annotations

import json
import sys

import click

from .bench import (
    BenchmarkConfig,
    dump_report,
    emit_report,
    report_to_csv,
    report_to_markdown,
    run_benchmark,
)
from .data import load_csv
from .baselines import load_synthetic_csv
from .pca import pca_project


@click.group()
def main() -> None:
    """Benchmark harness for convex-space oversampling on imbalanced data."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True),
              help="JSON benchmark configuration.")
@click.option("--out", "out_dir", default="bench-out", show_default=True,
              help="Output directory for reports.")
@click.option("--seed", type=int, default=None,
              help="Override the config master seed (also: CONVGEN_SEED env var).")
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Parallel worker processes.")
def run(config_path, out_dir, seed, jobs) -> None:
    """Run the full cross-validated benchmark grid."""
    cfg = BenchmarkConfig.from_json(config_path, seed_override=seed)

    def progress(result):
        ds, ovs, shuffle, _, seconds = result
        click.echo(f"  {ds} / {ovs} / shuffle {shuffle}: {seconds:.1f}s")

    report, timings = run_benchmark(cfg, jobs=jobs, progress=progress)
    paths = emit_report(report, timings, out_dir)
    failed = [c for c in report["cells"] if c["status"] != "ok"]
    click.echo(f"wrote {paths['raw']}")
    if failed:
        click.echo(f"{len(failed)} cell(s) failed; see the raw report for details")
        sys.exit(1)


@main.command()
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--label-col", required=True, help="Name of the label column.")
@click.option("--minority-label", required=True, help="Label value of the minority class.")
@click.option("--synthetic", "synthetic_path", required=True, type=click.Path(exists=True),
              help="CSV of synthetic rows (feature columns only).")
@click.option("--out", "out_path", required=True, help="Destination CSV of (set,x,y).")
def pca(dataset_path, label_col, minority_label, synthetic_path, out_path) -> None:
    """Project real and synthetic rows onto the real data's top-2 PCA axes."""
    dataset = load_csv(dataset_path, label_col, minority_label)
    synthetic = load_synthetic_csv(synthetic_path, dataset.n_features)
    projection = pca_project(dataset.features, synthetic)
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("set,x,y\n")
        for x, y in projection.real:
            fh.write(f"real,{float(x)!r},{float(y)!r}\n")
        for x, y in projection.synthetic:
            fh.write(f"synthetic,{float(x)!r},{float(y)!r}\n")
    frac = projection.explained_fraction
    click.echo(f"explained variance fractions: {frac[0]:.4f}, {frac[1]:.4f}")
    click.echo(f"wrote {out_path}")


@main.command()
@click.option("--raw", "raw_path", required=True, type=click.Path(exists=True),
              help="A report.json produced by `bench run`.")
@click.option("--format", "fmt", type=click.Choice(["md", "csv"]), default="md",
              show_default=True)
def report(raw_path, fmt) -> None:
    """Re-render a raw report dump as a Markdown or CSV table."""
    with open(raw_path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if fmt == "md":
        click.echo(report_to_markdown(raw), nl=False)
    else:
        click.echo(report_to_csv(raw), nl=False)


if __name__ == "__main__":
    main()
