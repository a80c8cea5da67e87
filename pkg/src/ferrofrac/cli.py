"""Command-line entry points.

Verbs:
    run --config FILE [--preset NAME] --out DIR
    mms --order {1,2} --levels N --out FILE
    mesh info FILE
    presets list

Exit codes: 0 success, 2 configuration/usage error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import config as cfgmod
from . import msh_io, outputs
from .errors import (DomainError, FerrofracError, GeometryError, NewtonDiverged,
                     NoConvergence, ParseError, SchemaError, SingularMatrix,
                     StaggerDiverged, TagError, UnitError)

_CONFIG_ERRORS = (SchemaError, UnitError, TagError, ParseError, GeometryError,
                  DomainError, FileNotFoundError, KeyError)
_SOLVER_ERRORS = (StaggerDiverged, NewtonDiverged, NoConvergence, SingularMatrix)


def _cmd_run(args):
    if args.config:
        cfg = cfgmod.parse_config(args.config)
    elif args.preset:
        cfg = cfgmod.preset(args.preset)
    else:
        cfg = cfgmod.default_config()
    sim = cfgmod.build_simulation(cfg)
    os.makedirs(args.out, exist_ok=True)
    every = sim.config.output_every
    vtk = cfg.section("output").get("vtk", True)

    def on_step(state, diag):
        if vtk and (state.n % every == 0):
            outputs.snapshot_vtk(sim, state,
                                 os.path.join(args.out, f"step_{state.n:05d}.vtk"))

    state, diags = sim.run(on_step=on_step)
    if vtk:
        outputs.snapshot_vtk(sim, state, os.path.join(args.out, "final.vtk"))
    outputs.write_timeseries(diags, os.path.join(args.out, "timeseries.csv"))
    print(f"completed {len(diags)} steps to t = {state.t:g}; "
          f"outputs in {args.out}")
    return 0


def _cmd_mms(args):
    rows = outputs.mms_study(args.order, args.levels)
    outputs.write_mms_csv(rows, args.out)
    for h, e, r in rows:
        print(f"h = {h:.5f}  L2 = {e:.4e}  rate = {r:.3f}")
    return 0


def _cmd_mesh_info(args):
    mesh = msh_io.load_mesh(args.path)
    areas = mesh.signed_areas()
    print(f"nodes:     {mesh.n_nodes}")
    print(f"cells:     {mesh.n_cells} (order {mesh.element_order})")
    print(f"area:      {areas.sum():.6g} mm^2")
    for name in mesh.region_names:
        cells = mesh.cells_of(name)
        print(f"  {name:16s} {cells.size:7d} cells  {areas[cells].sum():.6g} mm^2")
    for tag in mesh.edge_tag_names:
        n = int((mesh.edge_tags == mesh.edge_tag_names.index(tag)).sum())
        if n:
            print(f"  boundary {tag:16s} {n} edges")
    return 0


def _cmd_presets(_args):
    for name in cfgmod.preset_names():
        print(name)
    return 0


def make_parser():
    p = argparse.ArgumentParser(prog="ferrofrac",
                                description="magneto-mechanical phase-field "
                                            "fracture simulator")
    sub = p.add_subparsers(dest="verb", required=True)

    pr = sub.add_parser("run", help="run a case to t_end")
    pr.add_argument("--config", help="TOML case file")
    pr.add_argument("--preset", help="named preset (see `presets list`)")
    pr.add_argument("--out", required=True, help="output directory")
    pr.set_defaults(func=_cmd_run)

    pm = sub.add_parser("mms", help="manufactured-solution convergence study")
    pm.add_argument("--order", type=int, choices=(1, 2), required=True)
    pm.add_argument("--levels", type=int, required=True)
    pm.add_argument("--out", required=True, help="CSV output path")
    pm.set_defaults(func=_cmd_mms)

    pme = sub.add_parser("mesh", help="mesh utilities")
    msub = pme.add_subparsers(dest="mesh_verb", required=True)
    pinfo = msub.add_parser("info", help="summarize an MSH 2.2 file")
    pinfo.add_argument("path")
    pinfo.set_defaults(func=_cmd_mesh_info)

    pp = sub.add_parser("presets", help="preset utilities")
    psub = pp.add_subparsers(dest="presets_verb", required=True)
    plist = psub.add_parser("list", help="list shipped presets")
    plist.set_defaults(func=_cmd_presets)
    return p


def main(argv=None):
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _SOLVER_ERRORS as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 3
    except _CONFIG_ERRORS as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except FerrofracError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
