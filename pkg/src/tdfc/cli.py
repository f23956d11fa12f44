"""Command-line front end.

::

    tdfc design   --config double_scroll_origin
    tdfc certify  --design out/double_scroll_origin_design.json
    tdfc simulate --config double_hook_delta6 --out results
    tdfc sweep    --config double_hook_delta6

Exit status: 0 on success, 1 for usage or configuration errors, 2 when
the objective is not met (design not certified, run not converged).
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import config as cfgmod
from .chaos import StrategyConfig, delta_sweep, run_strategy, write_sweep_csv
from .matlin import DefectiveMatrixError, eig
from .monodromy import certify
from .synth import ControllerDesign, NonHyperbolicError, synthesize

__all__ = ['main', 'build_design']

EXIT_OK, EXIT_USAGE, EXIT_OBJECTIVE = 0, 1, 2

log = logging.getLogger('tdfc')


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f'{self.prog}: error: {message}\n')


def _fmt_c(z):
    if abs(z.imag) == 0:
        return f'{z.real:.4f}'
    return f'{z.real:.4f} {"+" if z.imag >= 0 else "-"} {abs(z.imag):.4f}i'


def _fmt_matrix(M, digits=4):
    w = max(len(f'{v:.{digits}f}') for v in np.ravel(M)) if np.size(M) else 1
    return '\n'.join('  [' + '  '.join(f'{v:{w}.{digits}f}' for v in row) + ']' for row in M)


def _load_config(args):
    cfg = cfgmod.load(args.config)
    if args.variant:
        cfg = cfg.with_variant(args.variant)
    if args.steps_per_delay is not None:
        if args.steps_per_delay < 10:
            raise cfgmod.ConfigError("--steps-per-delay must be at least 10")
        cfg = cfg.replace(steps_per_delay=args.steps_per_delay)
    if args.horizon is not None:
        if args.horizon < 0:
            raise cfgmod.ConfigError("--horizon must be non-negative")
        cfg = cfg.replace(horizon=args.horizon)
    return cfg


def build_design(cfg, system=None):
    """Synthesize the controller described by a config.

    Returns
    -------
    system, target, design
    """
    system = system or cfg.build_system()
    x_star = cfg.target_state(system)
    A = system.jacobian(x_star)
    try:
        targets = cfg.mode_targets(A)
        design = synthesize(A, cfg.tau, targets)
    except (NonHyperbolicError, DefectiveMatrixError) as exc:
        raise cfgmod.ConfigError(f"equilibrium {x_star.tolist()}: {exc}") from None
    if not targets:
        log.warning("equilibrium %s is already stable; K = 0", x_star.tolist())
    if cfg.gain is not None:
        design = design.with_gain(np.array(cfg.gain))
    return system, x_star, design


def _out_path(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def cmd_design(args):
    cfg = _load_config(args)
    system, x_star, design = build_design(cfg)
    spec = eig(design.A)
    print(f'experiment: {cfg.name}')
    print(f'equilibrium: {np.array2string(x_star, precision=6)}')
    print('eigenvalues of A:')
    for z in spec.eigenvalues:
        print(f'  {_fmt_c(z)}')
    print(f'tau = {design.tau:g}')
    print('block layout of Ktilde:')
    for i, blk in enumerate(design.layout):
        t = next((t for t in design.targets if t.index == i), None)
        what = 'stable, gain 0' if t is None else (
            f'zeta = {t.zeta:g}' if t.kind != 'complex'
            else f'rho = {t.rho:g}, theta = {np.angle(t.multiplier(blk.eigenvalue)):.6f}')
        print(f'  [{blk.start}:{blk.start + blk.size}] {blk.kind:7s} '
              f'lambda = {_fmt_c(blk.eigenvalue)}  ({what})')
    if design.overridden:
        print('K (from config, replaces the synthesized gain):')
    else:
        print('K:')
    print(_fmt_matrix(design.K))
    path = _out_path(args, f'{cfg.output_stem}_design.json')
    with open(path, 'w') as fh:
        json.dump({'experiment': cfg.name, 'design': design.to_dict()}, fh, indent=2)
        fh.write('\n')
    print(f'design written to {path}')
    return EXIT_OK


def _design_from_args(args):
    if args.design:
        try:
            with open(args.design) as fh:
                data = json.load(fh)
            return ControllerDesign.from_dict(data.get('design', data))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise cfgmod.ConfigError(f"cannot read design file {args.design}: {exc}") from None
    if not args.config:
        raise cfgmod.ConfigError("certify needs --design FILE or --config")
    return build_design(_load_config(args))[2]


def cmd_certify(args):
    design = _design_from_args(args)
    rep = certify(design)
    print(rep.summary())
    return EXIT_OK if rep.certified else EXIT_OBJECTIVE


def _require(cfg, *keys):
    for k in keys:
        if getattr(cfg, k) in (None, ()):
            raise cfgmod.ConfigError(f"config {cfg.name!r} has no {k}")


def cmd_simulate(args):
    cfg = _load_config(args)
    _require(cfg, 'delta', 'initial')
    system, x_star, design = build_design(cfg)
    sc = StrategyConfig(design, x_star, cfg.delta, cfg.max_wait, cfg.tol_settle)
    traj, met = run_strategy(system, sc, cfg.initial, cfg.h, cfg.grid_horizon)
    csv_path = _out_path(args, f'{cfg.output_stem}.csv')
    traj.to_csv(csv_path)
    rec = {'experiment': cfg.name, 'tau': cfg.tau, 'h': cfg.h, **met.to_dict()}
    with open(_out_path(args, f'{cfg.output_stem}_metrics.json'), 'w') as fh:
        json.dump(rec, fh, indent=2, sort_keys=True)
        fh.write('\n')
    print(json.dumps(rec, sort_keys=True))
    print(f'trajectory written to {csv_path} ({len(traj)} samples)')
    return EXIT_OK if met.converged else EXIT_OBJECTIVE


def cmd_sweep(args):
    cfg = _load_config(args)
    _require(cfg, 'initial')
    grid = cfg.delta_grid or ((cfg.delta,) if cfg.delta else ())
    if not grid:
        raise cfgmod.ConfigError(f"config {cfg.name!r} has neither delta_grid nor delta")
    system, x_star, design = build_design(cfg)
    rows = delta_sweep(system, design, x_star, grid, cfg.initial, cfg.h, cfg.grid_horizon,
                       cfg.max_wait, cfg.tol_settle)
    path = _out_path(args, f'{cfg.output_stem}_sweep.csv')
    write_sweep_csv(rows, path)
    write_sweep_csv(rows, sys.stdout)
    print(f'sweep written to {path}')
    return EXIT_OK if all(r.converged for r in rows) else EXIT_OBJECTIVE


def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='config file or bundled config name')
    common.add_argument('--variant', help='apply the overrides of [variant.NAME]')
    common.add_argument('--out', default='.', help='output directory (default: .)')
    common.add_argument('--steps-per-delay', type=int, help='grid points per delay (m)')
    common.add_argument('--horizon', type=float, help='simulated time T')
    common.add_argument('--seed', type=int, help='reserved; all computations are deterministic')
    common.add_argument('-v', '--verbose', action='store_true')

    p = _Parser(prog='tdfc', description='Two-delay periodic feedback control experiments.')
    p.add_argument('--list', action='store_true', help='list bundled configs and exit')
    sub = p.add_subparsers(dest='command', parser_class=_Parser)
    d = sub.add_parser('design', parents=[common], help='synthesize the gain matrix')
    d.set_defaults(func=cmd_design)
    c = sub.add_parser('certify', parents=[common], help='period-map certification')
    c.add_argument('--design', help='design file written by "tdfc design"')
    c.set_defaults(func=cmd_certify)
    s = sub.add_parser('simulate', parents=[common], help='wait-then-act simulation')
    s.set_defaults(func=cmd_simulate)
    w = sub.add_parser('sweep', parents=[common], help='trigger-radius sweep')
    w.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    p = _parser()
    args = p.parse_args(argv)
    if args.list:
        print('\n'.join(cfgmod.bundled_names()))
        return EXIT_OK
    if not args.command:
        p.print_usage(sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format='%(levelname)s: %(message)s')
    if args.command != 'certify' and not args.config:
        print(f'tdfc {args.command}: --config is required', file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except cfgmod.ConfigError as exc:
        print(f'tdfc {args.command}: config error: {exc}', file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
