"""Command-line client for the egodepth service.

Talks HTTP to a deployed server when --server is given; otherwise it mounts
the app in-process, so the commands work with nothing running.

Exit codes: 0 success, 2 config error, 3 empty input (including a run whose
accepted set came out empty).
"""

from __future__ import annotations

import json
import sys

import click
import httpx

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_EMPTY = 3
_CODE_TO_EXIT = {"config_invalid": EXIT_CONFIG, "input_empty": EXIT_EMPTY}


def _client(server: str | None):
    if server:
        return httpx.Client(base_url=server, timeout=3600.0)
    from fastapi.testclient import TestClient

    from .service.app import app

    return TestClient(app)


def _post(server: str | None, path: str, payload: dict) -> dict:
    with _client(server) as client:
        resp = client.post(path, json=payload)
    if resp.status_code == 200:
        return resp.json()
    try:
        detail = resp.json().get("detail", {})
    except (ValueError, AttributeError):
        detail = {}
    if isinstance(detail, dict) and "code" in detail:
        click.echo(f"error ({detail['code']}): {detail.get('message', '')}", err=True)
        sys.exit(_CODE_TO_EXIT.get(detail["code"], 1))
    click.echo(f"error: HTTP {resp.status_code}: {resp.text}", err=True)
    sys.exit(1)


def _load_json(path: str, what: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"error (config_invalid): cannot read {what} {path!r}: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


@click.group()
def main() -> None:
    """Generate relative-depth labels from egomotion video."""


@main.command()
@click.option("--config", "config_path", type=click.Path(), help="JSON run configuration.")
@click.option("--input", "input_dir", type=click.Path(), help="Frame directory (overrides config).")
@click.option("--output", "output_dir", type=click.Path(), help="Output directory (overrides config).")
@click.option("--flow-source", type=click.Choice(["external", "baseline"]), default=None)
@click.option("--preset", type=click.Choice(["citydriving", "kitti", "cityscapes"]), default=None)
@click.option("--workers", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--server", default=None, help="Base URL of a running service.")
def run(config_path, input_dir, output_dir, flow_source, preset, workers, seed, server) -> None:
    """Run the label-generation pipeline over a frame directory."""
    payload: dict = {"preset": preset}
    if config_path:
        payload["config"] = _load_json(config_path, "config")
    overrides = {
        "input_dir": input_dir,
        "output_dir": output_dir,
        "flow_source": flow_source,
        "workers": workers,
        "seed": seed,
    }
    payload["overrides"] = {k: v for k, v in overrides.items() if v is not None}
    body = _post(server, "/run", payload)
    counts = body["counts"]
    click.echo(json.dumps(counts, sort_keys=True))
    click.echo(f"pairs manifest:   {body['pairs_manifest']}")
    click.echo(f"dataset manifest: {body['dataset_manifest']}")
    if counts.get("accepted", 0) == 0:
        click.echo("no pairs accepted", err=True)
        sys.exit(EXIT_EMPTY)


@main.command("eval")
@click.option("--pred", "pred_dir", type=click.Path(), required=True)
@click.option("--gt", "gt_dir", type=click.Path(), required=True)
@click.option("--cap", "cap_m", type=float, default=80.0, show_default=True)
@click.option("--pairs", "n_pairs", type=int, default=50000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--margin", type=float, default=0.05, show_default=True)
@click.option("--server", default=None, help="Base URL of a running service.")
def eval_cmd(pred_dir, gt_dir, cap_m, n_pairs, seed, margin, server) -> None:
    """Score predicted depth maps against ground truth (matching .pfm stems)."""
    body = _post(
        server,
        "/eval",
        {
            "pred_dir": pred_dir,
            "gt_dir": gt_dir,
            "cap_m": cap_m,
            "n_pairs": n_pairs,
            "seed": seed,
            "margin": margin,
        },
    )
    click.echo(body["table"])


@main.command()
@click.option("--scene", "scene_path", type=click.Path(), required=True, help="Scene JSON file.")
@click.option("--output", "output_dir", type=click.Path(), default=None)
@click.option("--frames", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--server", default=None, help="Base URL of a running service.")
def synth(scene_path, output_dir, frames, seed, server) -> None:
    """Render an oracle sequence (frames, flow files, ground-truth depth)."""
    scene = _load_json(scene_path, "scene")
    if output_dir is None:
        output_dir = scene_path.rsplit(".", 1)[0] + "_out"
    body = _post(
        server,
        "/synth",
        {"scene": scene, "output_dir": output_dir, "frames": frames, "seed": seed},
    )
    click.echo(f"{len(body['frames'])} frames, {len(body['flow_files'])} flow files")
    click.echo(f"ground truth: {body['gt_depth']}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port) -> None:
    """Start the HTTP service."""
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
