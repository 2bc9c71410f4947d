import argparse
import csv
import io
import logging
import sys
from dataclasses import dataclass, field
from pathlib import Path

from channels.channels import BcChannel, MacChannel, P2pChannel, p2p_capacity
from codingsim.codingsim import SimConfig, simulate_random_coding
from codingsim.superposition import bc_superposition_sim
from fading.fading import parse_pmf, parse_snr, pmf_from_snr
from network.network import cutset_bound_exact, cutset_bound_mc, load_network
from regions.regions import (
    bc_inner_sweep,
    bc_outer_value,
    bc_region,
    gaussian_mac_region,
    gaussian_p2p_rate,
    mac_gap_chain,
    mac_region,
    region_gap,
)
from utils.config import get_profile
from utils.logging_config import setup_logging
from utils.utils import dump_json, log_error, log_json_block, log_step, save_json_log

logger = logging.getLogger(__name__)

HEADERS = {
    "mac-region": ["r1_coeff", "r2_coeff", "bound"],
    "bc-sweep": ["i0", "r1", "r2"],
    "bc-region": ["r1_coeff", "r2_coeff", "bound"],
    "bc-outer": ["mu", "value", "i0"],
    "cutset": ["cut_id", "member_list", "expected_rank"],
    "net-sim": ["rate", "n", "B", "trials", "errors", "error_rate", "effective_rate"],
}


@dataclass
class CommandResult:
    exit_code: int
    artifact_paths: list[Path] = field(default_factory=list)


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _emit(args, text: str, result: CommandResult) -> None:
    if args.out:
        path = Path(args.out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
        result.artifact_paths.append(path)
    else:
        sys.stdout.write(text)


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


# commands


def cmd_p2p(args, result):
    pmf = parse_pmf(args.pmf)
    ch = P2pChannel(args.n if args.n is not None else pmf.n, pmf)
    capacity = p2p_capacity(ch)
    log_step(f"capacity {capacity}")
    _emit(args, dump_json({"pmf": pmf.to_text(), "n": ch.n, "capacity": capacity}), result)


def cmd_mac_region(args, result):
    p1, p2 = parse_pmf(args.pmf1), parse_pmf(args.pmf2)
    ch = MacChannel(args.n1 if args.n1 is not None else p1.n, args.n2 if args.n2 is not None else p2.n, p1, p2)
    _emit(args, _csv_text(HEADERS["mac-region"], mac_region(ch).to_rows()), result)


def _bc_channel(args) -> BcChannel:
    return BcChannel(args.n, args.m1, parse_pmf(args.pmf2))


def cmd_bc_sweep(args, result):
    ch = _bc_channel(args)
    if args.region:
        text = _csv_text(HEADERS["bc-region"], bc_region(ch).to_rows())
    else:
        text = _csv_text(HEADERS["bc-sweep"], [[p.i0, p.r1, p.r2] for p in bc_inner_sweep(ch)])
    _emit(args, text, result)


def cmd_bc_outer(args, result):
    ch = _bc_channel(args)
    rows = []
    for mu in _float_list(args.mu):
        value, i0 = bc_outer_value(ch, mu)
        rows.append([mu, value, i0])
    _emit(args, _csv_text(HEADERS["bc-outer"], rows), result)


def cmd_gauss_compare(args, result):
    law1 = parse_snr(args.snr1)
    if args.snr2 is None:
        pmf = pmf_from_snr(law1)
        model = p2p_capacity(P2pChannel(pmf.n, pmf))
        gaussian = gaussian_p2p_rate(law1)
        report = {"model_rate": model, "gaussian_rate": gaussian, "gap": abs(model - gaussian)}
    else:
        law2 = parse_snr(args.snr2)
        p1, p2 = pmf_from_snr(law1), pmf_from_snr(law2)
        model = mac_region(MacChannel(p1.n, p2.n, p1, p2))
        gaussian = gaussian_mac_region(law1, law2)
        directions = args.directions or get_profile().regions.directions
        report = {
            "model_region": model.to_rows(),
            "gaussian_region": gaussian.to_rows(),
            "region_gap": region_gap(model, gaussian, directions),
            "directions": directions,
            "sum_rate_chain": mac_gap_chain(law1, law2).model_dump(),
        }
    log_json_block("Gaussian comparison", report)
    _emit(args, dump_json(report), result)


def cmd_cutset(args, result):
    net = load_network(args.net)
    if args.exact:
        bound = cutset_bound_exact(net)
    else:
        samples = args.samples or get_profile().simulation.samples
        bound = cutset_bound_mc(net, samples, args.seed, workers=args.workers, progress=args.progress)
    rows = [[i, c.cut.label(net.nodes), c.expected_rank] for i, c in enumerate(bound.per_cut)]
    summary = bound.summary(net)
    log_step(f"cut-set bound {bound.value} at cut {{{', '.join(summary['argmin_cut'])}}}")
    log_json_block("Cut-set summary", summary)
    _emit(args, _csv_text(HEADERS["cutset"], rows), result)
    if args.summary:
        result.artifact_paths.append(save_json_log(summary, args.summary))


def cmd_net_sim(args, result):
    net = load_network(args.net)
    rows = []
    for rate in _float_list(args.rates):
        for n in _int_list(args.n):
            cfg = SimConfig(
                rate=rate,
                block_len=n,
                blocks=args.blocks,
                slack=args.slack,
                trials=args.trials,
                seed=args.seed,
                scheme=args.scheme,
                workers=args.workers,
                progress=args.progress,
            )
            report = simulate_random_coding(net, cfg)
            logger.info("R=%g n=%d: %d/%d errors", rate, n, report.decode_errors, report.trials)
            rows.append(report.csv_row())
    _emit(args, _csv_text(HEADERS["net-sim"], rows), result)


def cmd_bc_sim(args, result):
    ch = _bc_channel(args)
    report = bc_superposition_sim(
        ch, args.i0, args.block_len, args.trials, args.seed, workers=args.workers, progress=args.progress
    )
    log_step(f"r1={report.r1_achieved} r2={report.r2_achieved} (target {report.r2_target})")
    _emit(args, dump_json(report.model_dump(mode="json")), result)


# parser


def build_parser() -> argparse.ArgumentParser:
    sim = get_profile().simulation
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=sim.seed)
    common.add_argument("--out", default=None, help="output file (default: standard output)")
    common.add_argument("--samples", type=int, default=None, help="Monte Carlo draws")
    common.add_argument("--workers", type=int, default=sim.workers)
    common.add_argument("--progress", action="store_true", default=None)

    parser = argparse.ArgumentParser(prog="bitlevel", description="Bit-level fading channel models")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("p2p", parents=[common], help="point-to-point capacity E[M]")
    p.add_argument("--pmf", required=True)
    p.add_argument("--n", type=int, default=None)
    p.set_defaults(func=cmd_p2p)

    p = sub.add_parser("mac-region", parents=[common], help="two-user MAC capacity region")
    p.add_argument("--pmf1", required=True)
    p.add_argument("--pmf2", required=True)
    p.add_argument("--n1", type=int, default=None)
    p.add_argument("--n2", type=int, default=None)
    p.set_defaults(func=cmd_mac_region)

    for name, func, help_text in [
        ("bc-sweep", cmd_bc_sweep, "superposition operating points over i0"),
        ("bc-outer", cmd_bc_outer, "weighted-sum outer bound"),
        ("bc-sim", cmd_bc_sim, "erasure-coded superposition simulation"),
    ]:
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--m1", type=int, required=True)
        p.add_argument("--pmf2", required=True)
        p.set_defaults(func=func)
        if name == "bc-sweep":
            p.add_argument("--region", action="store_true", help="emit region constraints instead of points")
        elif name == "bc-outer":
            p.add_argument("--mu", required=True, help="comma-separated weights")
        else:
            p.add_argument("--i0", type=int, required=True)
            p.add_argument("--block-len", type=int, default=2048)
            p.add_argument("--trials", type=int, default=100)

    p = sub.add_parser("gauss-compare", parents=[common], help="bit-level model vs Gaussian reference")
    p.add_argument("--snr1", required=True, help="snr:prob,...")
    p.add_argument("--snr2", default=None, help="second user for the MAC comparison")
    p.add_argument("--directions", type=int, default=None)
    p.set_defaults(func=cmd_gauss_compare)

    p = sub.add_parser("cutset", parents=[common], help="cut-set bound of a network file")
    p.add_argument("--net", required=True)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--summary", default=None, help="JSON file for value, argmin and error")
    p.set_defaults(func=cmd_cutset)

    p = sub.add_parser("net-sim", parents=[common], help="random coding simulation on a network file")
    p.add_argument("--net", required=True)
    p.add_argument("--rates", required=True, help="comma-separated rates")
    p.add_argument("--n", default="64", help="comma-separated block lengths")
    p.add_argument("--blocks", type=int, default=8)
    p.add_argument("--slack", type=int, default=None)
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--scheme", choices=["linear-random", "lookup-random"], default="linear-random")
    p.set_defaults(func=cmd_net_sim)

    return parser


# flags that only some commands consume
USES_SAMPLES = {"cutset"}
USES_PROGRESS = {"cutset", "net-sim", "bc-sim"}


def run(argv: list[str]) -> CommandResult:
    setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.samples is not None and args.command not in USES_SAMPLES:
            parser.error(f"--samples has no effect on {args.command}")
        if args.progress and args.command not in USES_PROGRESS:
            parser.error(f"--progress has no effect on {args.command}")
    except SystemExit as e:
        return CommandResult(e.code if isinstance(e.code, int) else 2)
    if args.progress is None:
        args.progress = get_profile().simulation.progress

    result = CommandResult(0)
    try:
        if args.workers < 1:
            raise ValueError(f"--workers must be >= 1, got {args.workers}")
        args.func(args, result)
    except (ValueError, OSError) as e:
        log_error(f"{args.command} failed", e)
        return CommandResult(1, result.artifact_paths)
    return result
