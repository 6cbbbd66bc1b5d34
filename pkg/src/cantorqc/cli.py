"""One executable, one subcommand per experiment, deterministic output.

Exit codes: 0 on success, 2 on parameter rejection (the message names the
failed inequality), 3 on runtime or numerical failure.  All output is JSON
(sorted keys) or headered CSV with '.' decimals, so identical invocations are
byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
import numpy as np

from . import nonremovable, qcmap, verify
from .geometry import (
    CantorQCError,
    Disk,
    ParameterError,
    build_packing,
    derive_params,
    generation_centers,
)


class CliError(CantorQCError):
    """Runtime failure local to the command line layer."""


def _emit(text: str, out_path: str | None) -> None:
    if out_path:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _params_from(args: argparse.Namespace):
    packing = build_packing(args.m)
    return derive_params(args.t, args.K, packing)


def _dry_run_payload(args: argparse.Namespace, derived: dict | None) -> str:
    config = {
        k: v for k, v in sorted(vars(args).items()) if k not in ("func",) and v is not None
    }
    config = {k: (str(v) if isinstance(v, complex) else v) for k, v in config.items()}
    return _json_text({"command": args.command, "config": config, "derived": derived})


def _add_common(parser: argparse.ArgumentParser, *, seed: bool = True) -> None:
    parser.add_argument("--t", type=float, default=1.0, help="source dimension in (0, 2)")
    parser.add_argument("--K", type=float, default=2.0, help="distortion, K >= 1")
    parser.add_argument("--m", type=int, default=100, help="number of first-generation disks")
    parser.add_argument("--out", type=str, default=None, help="output path (default stdout)")
    parser.add_argument(
        "--format", choices=("json", "csv"), default="json", help="output format"
    )
    parser.add_argument("--dry-run", action="store_true", help="print resolved config and stop")
    if seed:
        parser.add_argument("--seed", type=int, default=0, help="deterministic RNG seed")


# ---------------------------------------------------------------------------
# subcommands


def cmd_params(args: argparse.Namespace) -> None:
    params = _params_from(args)
    if args.dry_run:
        _emit(_dry_run_payload(args, params.to_json_dict()), args.out)
        return
    _emit(_json_text(params.to_json_dict()), args.out)


def cmd_disks(args: argparse.Namespace) -> None:
    params = _params_from(args)
    if args.dry_run:
        _emit(_dry_run_payload(args, params.to_json_dict()), args.out)
        return
    centers = generation_centers(args.N, args.side, params)
    ratio = params.source_ratio if args.side == "source" else params.image_ratio
    radius = ratio**args.N
    if args.format == "csv":
        lines = ["re,im"]
        lines += [f"{float(z.real)!r},{float(z.imag)!r}" for z in centers]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(
            _json_text(
                {
                    "side": args.side,
                    "N": args.N,
                    "radius": radius,
                    "centers": [[z.real, z.imag] for z in centers],
                }
            ),
            args.out,
        )


def _iter_point_chunks(path: str, chunk: int = 8192):
    """Yield point arrays of bounded size; malformed lines carry their number."""
    buf: list[complex] = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if lineno == 1 and parts[0].strip().lower() in ("re", "x"):
                continue
            try:
                buf.append(complex(float(parts[0]), float(parts[1])))
            except (ValueError, IndexError) as exc:
                raise CliError(f"{path}:{lineno}: malformed point line {line!r}") from exc
            if len(buf) >= chunk:
                yield np.asarray(buf, dtype=np.complex128)
                buf = []
    if buf:
        yield np.asarray(buf, dtype=np.complex128)


def _read_points(path: str) -> np.ndarray:
    chunks = list(_iter_point_chunks(path))
    if not chunks:
        return np.empty(0, dtype=np.complex128)
    return np.concatenate(chunks)


def cmd_eval(args: argparse.Namespace) -> None:
    params = _params_from(args)
    if args.dry_run:
        _emit(_dry_run_payload(args, params.to_json_dict()), args.out)
        return
    # streaming: bounded chunks in, lines straight out
    sink = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        if args.mode == "jacobian":
            sink.write("re,im,jacobian\n")
            for pts in _iter_point_chunks(args.points):
                jac = qcmap.jacobian_batch(pts, params, depth_max=args.depth)
                for z, v in zip(pts, jac):
                    sink.write(f"{float(z.real)!r},{float(z.imag)!r},{float(v)!r}\n")
        else:
            evaluate = qcmap.phi_batch if args.mode == "phi" else qcmap.phi_inverse_batch
            sink.write("re,im,phi_re,phi_im,depth,err_bound\n")
            for pts in _iter_point_chunks(args.points):
                values, depths, errs = evaluate(pts, params, depth_max=args.depth)
                for z, v, d, e in zip(pts, values, depths, errs):
                    sink.write(
                        f"{float(z.real)!r},{float(z.imag)!r},{float(v.real)!r},"
                        f"{float(v.imag)!r},{int(d)},{float(e)!r}\n"
                    )
    finally:
        if args.out:
            sink.close()


def cmd_lp_mass(args: argparse.Namespace) -> None:
    params = _params_from(args)
    if args.dry_run:
        _emit(_dry_run_payload(args, params.to_json_dict()), args.out)
        return
    closed = qcmap.lp_mass_closed_form(args.p, params, n_max=args.n_max)
    payload = {"closed_form": closed.to_json_dict()}
    if args.samples > 0:
        mc = qcmap.lp_mass_monte_carlo(
            args.p, params, args.samples, args.depth, args.seed, method=args.method
        )
        payload["monte_carlo"] = mc.to_json_dict()
    _emit(_json_text(payload), args.out)


def cmd_dimension(args: argparse.Namespace) -> None:
    params = _params_from(args)
    if args.dry_run:
        _emit(_dry_run_payload(args, params.to_json_dict()), args.out)
        return
    est = verify.box_dimension(args.side, params, args.N, seed=args.seed)
    reference = params.t if args.side == "source" else params.dim_image
    if args.format == "csv":
        lines = ["scale,count"]
        lines += [f"{float(s)!r},{int(c)}" for s, c in zip(est.scales, est.counts)]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        payload = est.to_json_dict()
        payload.update({"side": args.side, "N": args.N, "reference": reference})
        _emit(_json_text(payload), args.out)


def cmd_holder(args: argparse.Namespace) -> None:
    params = _params_from(args)
    if args.dry_run:
        _emit(_dry_run_payload(args, params.to_json_dict()), args.out)
        return
    target = args.target if args.target is not None else params.holder_exp
    config = verify.HolderConfig(params=params, adversarial_depth=args.depth_pairs)
    map_fn = qcmap.phi_map_fn(params, depth_max=args.depth)
    if args.format == "csv":
        sep, ratio = verify.holder_pair_table(map_fn, target, config, seed=args.seed)
        lines = ["separation,ratio"]
        lines += [f"{float(s)!r},{float(q)!r}" for s, q in zip(sep, ratio)]
        _emit("\n".join(lines) + "\n", args.out)
        return
    report = verify.holder_estimate(map_fn, target, config, seed=args.seed)
    payload = report.to_json_dict()
    payload["holder_exp"] = params.holder_exp
    _emit(_json_text(payload), args.out)


def cmd_packing(args: argparse.Namespace) -> None:
    params = _params_from(args)
    if args.dry_run:
        _emit(_dry_run_payload(args, params.to_json_dict()), args.out)
        return
    s = args.s if args.s is not None else params.t
    report = verify.packing_condition_check(args.N, s, args.trials, args.seed, params)
    _emit(_json_text(report.to_json_dict()), args.out)


def cmd_growth(args: argparse.Namespace) -> None:
    params = _params_from(args)
    if args.dry_run:
        _emit(_dry_run_payload(args, params.to_json_dict()), args.out)
        return
    report = verify.integral_growth_check(
        args.trials, args.seed, params, args.depth, args.samples
    )
    payload = report.to_json_dict()
    payload["generation_disk_constants"] = list(
        verify.generation_disk_growth(params, tuple(range(1, args.N + 1)))
    )
    _emit(_json_text(payload), args.out)


def cmd_cauchy(args: argparse.Namespace) -> None:
    if args.dry_run:
        derived = {
            "threshold": nonremovable.removability_threshold(args.alpha, args.K),
            "max_epsilon": nonremovable.max_admissible_epsilon(args.alpha, args.K, args.t)
            if args.t > nonremovable.removability_threshold(args.alpha, args.K)
            else None,
        }
        _emit(_dry_run_payload(args, derived), args.out)
        return
    spec = nonremovable.build_counterexample(
        args.alpha, args.K, args.t, N=args.N, depth_max=args.depth, m=args.m, seed=args.seed
    )
    if args.measure_out:
        with open(args.measure_out, "w", newline="") as fh:
            fh.write(_json_text(spec.measure.to_json_dict()))
    report = nonremovable.verify_counterexample(spec, seed=args.seed)
    payload = {"spec": spec.to_json_dict(), "report": report.to_json_dict()}
    _emit(_json_text(payload), args.out)


def _parse_hosts(text: str) -> list[tuple[complex, float]]:
    hosts = []
    for part in text.split(";"):
        fields = part.split(",")
        if len(fields) != 3:
            raise CliError(f"host spec {part!r} is not 're,im,radius'")
        try:
            hosts.append((complex(float(fields[0]), float(fields[1])), float(fields[2])))
        except ValueError as exc:
            raise CliError(f"host spec {part!r} has non-numeric fields") from exc
    return hosts


def cmd_glue(args: argparse.Namespace) -> None:
    hosts = _parse_hosts(args.hosts)
    piece_ms = [int(x) for x in args.piece_m.split(",")]
    if len(piece_ms) != len(hosts):
        raise ParameterError(
            f"got {len(hosts)} hosts but {len(piece_ms)} piece sizes; counts must match"
        )
    pieces = [
        qcmap.GluedPiece(host=Disk(center, radius), params=derive_params(args.t, args.K, build_packing(mj)))
        for (center, radius), mj in zip(hosts, piece_ms)
    ]
    spec = qcmap.make_glued_spec(pieces)
    if args.dry_run:
        _emit(_dry_run_payload(args, spec.to_json_dict()), args.out)
        return
    if args.points:
        pts = _read_points(args.points)
        lines = ["re,im,phi_re,phi_im,depth,err_bound"]
        for z in pts:
            res = qcmap.glued_map(complex(z), spec, depth_max=args.depth)
            lines.append(
                f"{float(z.real)!r},{float(z.imag)!r},{float(res.value.real)!r},"
                f"{float(res.value.imag)!r},{res.depth},{float(res.err_bound)!r}"
            )
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(_json_text(spec.to_json_dict()), args.out)


# ---------------------------------------------------------------------------
# wiring


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cantorqc",
        description="Extremal quasiconformal maps on Cantor-type disk packings",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="derive and dump construction parameters")
    _add_common(p, seed=False)
    p.set_defaults(func=cmd_params)

    p = sub.add_parser("disks", help="emit generation disk centers")
    _add_common(p, seed=False)
    p.add_argument("--N", type=int, default=1, help="generation")
    p.add_argument("--side", choices=("source", "image"), default="source")
    p.set_defaults(func=cmd_disks)

    p = sub.add_parser("eval", help="batch-evaluate the map on a points file")
    _add_common(p, seed=False)
    p.add_argument("--points", type=str, required=True, help="CSV file of re,im per line")
    p.add_argument("--mode", choices=("phi", "inverse", "jacobian"), default="phi")
    p.add_argument("--depth", type=int, default=32)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("lp-mass", help="closed-form and Monte Carlo Jacobian p-mass")
    _add_common(p)
    p.add_argument("--p", type=float, default=1.0)
    p.add_argument("--n-max", type=int, default=64, help="generations in partial sums")
    p.add_argument("--samples", type=int, default=0, help="Monte Carlo samples (0 = skip)")
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--method", choices=("stratified", "uniform"), default="stratified")
    p.set_defaults(func=cmd_lp_mass)

    p = sub.add_parser("dimension", help="box-counting dimension of generation centers")
    _add_common(p)
    p.add_argument("--N", type=int, default=4, help="generation")
    p.add_argument("--side", choices=("source", "image"), default="source")
    p.set_defaults(func=cmd_dimension)

    p = sub.add_parser("holder", help="Hölder exponent estimation for the map")
    _add_common(p)
    p.add_argument("--target", type=float, default=None, help="target exponent (default t/t')")
    p.add_argument("--depth", type=int, default=40)
    p.add_argument("--depth-pairs", type=int, default=5, help="adversarial pair generations")
    p.set_defaults(func=cmd_holder)

    p = sub.add_parser("packing", help="packing-condition constant sweep")
    _add_common(p)
    p.add_argument("--N", type=int, default=3, help="generation")
    p.add_argument("--s", type=float, default=None, help="exponent (default t)")
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_packing)

    p = sub.add_parser("growth", help="Jacobian integral growth sweep")
    _add_common(p)
    p.add_argument("--N", type=int, default=4, help="generation disks in the closed form")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--samples", type=int, default=2000, help="Monte Carlo samples per disk")
    p.set_defaults(func=cmd_growth)

    p = sub.add_parser("cauchy", help="build and verify the nonremovability counterexample")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--K", type=float, default=2.0)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--m", type=int, default=None, help="override the auto-selected layout")
    p.add_argument("--N", type=int, default=2, help="measure discretization generation")
    p.add_argument("--depth", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--measure-out", type=str, default=None, help="write the atom list JSON here")
    p.add_argument("--out", type=str, default=None)
    p.add_argument("--format", choices=("json",), default="json")
    p.add_argument("--dry-run", action="store_true")
    p.set_defaults(func=cmd_cauchy)

    p = sub.add_parser("glue", help="validate or evaluate a glued map")
    _add_common(p, seed=False)
    p.add_argument(
        "--hosts", type=str, required=True, help="semicolon-separated 're,im,radius' triples"
    )
    p.add_argument("--piece-m", type=str, required=True, help="comma-separated m per host")
    p.add_argument("--points", type=str, default=None, help="optional CSV of points to map")
    p.add_argument("--depth", type=int, default=32)
    p.set_defaults(func=cmd_glue)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except ParameterError as exc:
        print(f"parameter rejection: {exc}", file=sys.stderr)
        return 2
    except CantorQCError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except BrokenPipeError:
        return 0
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
