"""Command-line front door: validate and exercise KBs, run the dialog REPL,
simulate the closed loop, serve the HTTP API.

Exit codes: 0 success, 1 usage error, 2 KB error.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click

from . import __version__
from .errors import FuzzctlError, IntegrityError, SchemaError, UnknownKB
from .inference import defuzzify, infer
from .kb import (
    RepresentationLevel,
    load_knowledge_base,
    load_packaged_kb,
    membership_from_spec,
    validate_knowledge_base,
)
from .loop import run_closed_loop, trajectory_csv
from .plant import DisturbanceProfile
from .service import KBRegistry, SessionManager, build_app


@click.group()
@click.version_option(__version__)
def cli():
    """Situational fuzzy control engine."""


def _load_document(path: str):
    return Path(path).read_text("utf-8")


@cli.command()
@click.argument("kb_path", type=click.Path(exists=True, dir_okay=False))
def validate(kb_path: str):
    """Check a KB document and print every invariant violation."""
    kb = load_knowledge_base(_load_document(kb_path), strict=False)
    report = validate_knowledge_base(kb)
    for issue in report.entries:
        click.echo(f"error: {issue.location}: {issue.message}")
    for issue in report.warnings:
        click.echo(f"warning: {issue.location}: {issue.message}")
    if not report.ok:
        raise SchemaError(f"{len(report.entries)} invariant violation(s)")
    click.echo("OK")


@cli.command("infer")
@click.argument("kb_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("premises_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--level", type=click.Choice([lv.value for lv in RepresentationLevel]),
              default=None, help="Restrict to rules at one representation level.")
def infer_cmd(kb_path: str, premises_path: str, level: str | None):
    """Run rule inference over a premises file and print the result."""
    kb = load_knowledge_base(_load_document(kb_path))
    raw = json.loads(Path(premises_path).read_text("utf-8"))
    premises = {}
    for name, spec in raw.items():
        variable = kb.variable(name)
        if isinstance(spec, str):
            premises[name] = variable.terms[spec]
        elif isinstance(spec, list):
            premises[name] = membership_from_spec(
                variable.universe, {"shape": "points", "mu": spec})
        else:
            premises[name] = membership_from_spec(variable.universe, spec)
    result = infer(premises, kb, level=RepresentationLevel(level) if level else None)
    out = {
        "activations": result.rule_activations,
        "defaulted": {k: list(v) for k, v in result.defaulted.items()},
        "output": {},
    }
    for name, fset in result.output.items():
        crisp = defuzzify(fset, "centroid")
        out["output"][name] = {
            "points": list(fset.universe.points),
            "mu": list(fset.memberships),
            "centroid": crisp.value,
            "degenerate": crisp.degenerate,
        }
    click.echo(json.dumps(out, indent=2, sort_keys=True))


@cli.command()
@click.argument("kb_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--lang", default="en", show_default=True)
@click.option("--policy", default="wisdom", type=click.Choice(["wisdom", "intuition"]),
              show_default=True)
@click.option("--theta", default=0.5, show_default=True)
@click.option("--seed", default=0, show_default=True)
def repl(kb_path: str, lang: str, policy: str, theta: float, seed: int):
    """Interactive dialog loop against a KB (EOF or ctrl-c to leave)."""
    registry = KBRegistry()
    kb_id = registry.register(_load_document(kb_path))
    manager = SessionManager(registry, log_dir=os.environ.get("LOG_DIR"))
    session_id = manager.create_session(kb_id, language=lang, policy=policy,
                                        theta=theta, seed=seed)
    click.echo(f"session {session_id} ready; speak ({lang})")
    while True:
        try:
            utterance = input("> ")
        except (EOFError, KeyboardInterrupt):
            click.echo("")
            break
        if not utterance.strip():
            continue
        response = manager.dialog_turn(session_id, utterance)
        click.echo(response.text)


@cli.command()
@click.argument("kb_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--steps", default=20, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--policy", default="wisdom", type=click.Choice(["wisdom", "intuition"]),
              show_default=True)
@click.option("--theta", default=0.5, show_default=True)
@click.option("--disturb-uniform", default=None, metavar="VAR:LO:HI",
              help="Seeded uniform disturbance on one plant variable.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None,
              help="Write the trajectory CSV here instead of stdout.")
def simulate(kb_path: str, steps: int, seed: int, policy: str, theta: float,
             disturb_uniform: str | None, csv_path: str | None):
    """Run the closed loop and emit the trajectory CSV."""
    kb = load_knowledge_base(_load_document(kb_path))
    profile = DisturbanceProfile.zero(seed)
    if disturb_uniform:
        var, lo, hi = disturb_uniform.split(":")
        profile = DisturbanceProfile(seed=seed, uniform={var: (float(lo), float(hi))})
    result = run_closed_loop(kb, steps=steps, disturbance=profile,
                             policy=policy, theta=theta)
    text = trajectory_csv(kb, result.records)
    if csv_path:
        Path(csv_path).write_text(text, "utf-8")
        click.echo(f"wrote {csv_path}")
    else:
        click.echo(text, nl=False)


def build_default_manager() -> SessionManager:
    """Registry with the packaged KBs plus any ``*.kb.json`` under $KB_DIR;
    session logs go to $LOG_DIR when set."""
    registry = KBRegistry()
    for name in ("inventory", "commute"):
        registry.add(name, load_packaged_kb(name))
    kb_dir = os.environ.get("KB_DIR")
    if kb_dir:
        for path in sorted(Path(kb_dir).glob("*.kb.json")):
            registry.register(path.read_text("utf-8"), kb_id=path.name[:-len(".kb.json")])
    return SessionManager(registry, log_dir=os.environ.get("LOG_DIR"))


def default_frontend_dir() -> str | None:
    frontend = os.environ.get("FRONTEND_DIR")
    if frontend is not None:
        return frontend or None
    candidate = Path(__file__).resolve().parents[3] / "frontend" / "dist"
    return str(candidate) if candidate.is_dir() else None


@cli.command()
@click.option("--port", default=None, type=int, help="Defaults to $PORT or 8000.")
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(port: int | None, host: str):
    """Serve the HTTP API (and the console, if its build is present)."""
    import uvicorn

    app = build_app(build_default_manager(), frontend_dir=default_frontend_dir())
    uvicorn.run(app, host=host, port=port or int(os.environ.get("PORT", "8000")))


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.ClickException as exc:
        exc.show()
        return 1
    except click.Abort:
        return 1
    except (SchemaError, IntegrityError, UnknownKB) as exc:
        click.echo(f"KB error: {exc}", err=True)
        return 2
    except FuzzctlError as exc:
        click.echo(f"error: {exc}", err=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
