"""Command-line entry point.

    sfem strength --n 10 --delta 0.01 --r 0.1
    sfem strength --adaptive --schedule 10,50,20,100 --activations 4000
    sfem feedback-sim --arm all
    sfem run scenario1 --assert
"""

from __future__ import annotations

import argparse
from contextlib import nullcontext
import logging
import sys
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from .art import DomainError
from .codec import DecodeError
from .interpreter import CatalogError
from .sim import (
    DEFAULT_SCHEDULE,
    Arm,
    FeedbackSimResult,
    Scenario,
    ScenarioError,
    ScenarioRunner,
    StrengthRow,
    parse_feedback,
    quarter_schedule,
    round_robin,
    run_feedback_sim,
    write_csv,
)
from .strength import StrengthParams, terminal_value

EXIT_OK, EXIT_ASSERT, EXIT_USAGE = 0, 1, 2


def _stamp() -> str:
    return datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%SZ")


def _open_out(out: str | None, default_name: str):
    if out == "-":
        return sys.stdout, None
    path = Path(out) if out else Path(default_name)
    return path.open("w", encoding="utf-8", newline=""), path


def cmd_strength(args) -> int:
    delta = None if args.adaptive else args.delta
    if delta is None and not args.adaptive:
        raise DomainError("give --delta or --adaptive")
    params = StrengthParams(args.s_init, args.r, args.theta, delta)
    if args.schedule:
        schedule = [int(x) for x in args.schedule.split(",")]
        rows = round_robin(params, quarter_schedule(schedule, args.activations), activations=args.activations)
        tag = "dynamic"
    else:
        rows = round_robin(params, args.n, iterations=args.iters)
        tag = f"n{args.n}"
    mode = "adaptive" if args.adaptive else f"d{delta}"
    fh, path = _open_out(args.out, f"strength-{tag}-{mode}-r{args.r}-{_stamp()}.csv")
    rows = list(rows)
    with fh if path else nullcontext(fh):
        write_csv(rows, StrengthRow.FIELDS, fh)
    last = rows[-1]
    msg = f"{len(rows)} activations, final strength {last.strength:.6f}"
    if last.pruned:
        msg += f", tracked node pruned at activation {last.activation}"
    if not args.adaptive and not args.schedule:
        msg += f", terminal value {terminal_value(args.n, args.r, delta):.4f}"
    print(msg, file=sys.stderr)
    if path:
        print(f"trace written to {path}", file=sys.stderr)
    return EXIT_OK


def cmd_feedback_sim(args) -> int:
    arms = list(Arm) if args.arm.lower() == "all" else [Arm(args.arm.upper())]
    for arm in arms:
        res: FeedbackSimResult = run_feedback_sim(arm, rounds=args.rounds)
        print(f"== {arm.value}")
        print("\n".join(res.transcript))
        out = args.out
        if out and len(arms) > 1 and out != "-":
            p = Path(out)
            out = str(p.with_name(f"{p.stem}-{arm.value}{p.suffix}"))
        fh, path = _open_out(out, f"feedback-{arm.value}-{_stamp()}.csv")
        with fh if path else nullcontext(fh):
            write_csv(res.rows, FeedbackSimResult.FIELDS, fh)
    return EXIT_OK


def resolve_scenario(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    bundled = resources.files("sfem") / "scenarios" / (name if name.endswith(".json") else f"{name}.json")
    if bundled.is_file():
        return Path(str(bundled))
    raise ScenarioError(f"no scenario file {name!r}")


def _terminal_prompt(act) -> float | None:
    while True:
        try:
            text = input(f"[t={act.time:g}] service {act.device}:{act.action} - feedback (+ / ok / - / number, "
                         "enter for none): ")
        except EOFError:
            return None
        try:
            return parse_feedback(text)
        except ValueError:
            print("not understood; try again", file=sys.stderr)


def cmd_run(args) -> int:
    path = resolve_scenario(args.scenario)
    scenario = Scenario.load(path)
    runner = ScenarioRunner(scenario, args.arm.upper(), seed=args.seed,
                            feedback_prompt=_terminal_prompt if args.interactive else None)
    runner.run()
    for line in runner.scheduler.events:
        print(line)
    fh, out_path = _open_out(args.out, f"{scenario.name}-{runner.arm.value}-{_stamp()}.csv")
    with fh if out_path else nullcontext(fh):
        fh.write(runner.trace_csv())
    if out_path:
        print(f"trace written to {out_path}", file=sys.stderr)
    if args.check:
        problems = runner.check_expected()
        if problems:
            for p in problems:
                print(f"ASSERT FAIL {p}")
            return EXIT_ASSERT
        print("ASSERT OK")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sfem", description="Episodic memory service simulations")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("strength", help="memory-strength round-robin simulation")
    s.add_argument("--n", type=int, default=10, help="number of episodes (fixed-n mode)")
    s.add_argument("--delta", type=float, default=None, help="fixed decay factor")
    s.add_argument("--adaptive", action="store_true", help="use the adaptive decay factor")
    s.add_argument("--r", type=float, default=0.1)
    s.add_argument("--s-init", dest="s_init", type=float, default=0.8)
    s.add_argument("--theta", type=float, default=0.1)
    s.add_argument("--iters", type=int, default=2000, help="iterations (fixed-n mode)")
    s.add_argument("--schedule", nargs="?", const=",".join(map(str, DEFAULT_SCHEDULE)), default=None,
                   help="dynamic n over quarters of the run, e.g. 10,50,20,100")
    s.add_argument("--activations", type=int, default=4000, help="activations (dynamic mode)")
    s.add_argument("--out")
    s.set_defaults(func=cmd_strength)

    f = sub.add_parser("feedback-sim", help="three-arm feedback comparison")
    f.add_argument("--arm", default="all", help="SFEM, FB_ONLY, VANILLA or all")
    f.add_argument("--rounds", type=int, default=4, help="cues after the preference change")
    f.add_argument("--out")
    f.set_defaults(func=cmd_feedback_sim)

    r = sub.add_parser("run", help="replay a scenario file")
    r.add_argument("scenario", help="scenario JSON path or bundled name (scenario1, scenario2)")
    r.add_argument("--arm", default="SFEM")
    r.add_argument("--interactive", action="store_true")
    r.add_argument("--assert", dest="check", action="store_true")
    r.add_argument("--out")
    r.add_argument("--seed", type=int, default=0)
    r.set_defaults(func=cmd_run)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (DomainError, ScenarioError, CatalogError, DecodeError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
