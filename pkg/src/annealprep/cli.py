"""Command-line front end.

Subcommands mirror the experiment workflow: ``reduce`` (iem/bce/alm),
``embed``, ``sample``, ``sweep``, ``survey`` and ``check``.  Exit codes:
0 success, 1 usage error, 2 unreadable or malformed input, 3 infeasible
operation (e.g. a plateau selection that no row reaches).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .embedding import (
    EmbeddingError,
    assign_coefficients,
    chain_expand,
    parse_embedding_json,
    parse_hardware_json,
    write_embedding_json,
    write_hardware_json,
)
from .harness import (
    MetricOptions,
    NoPlateauError,
    SweepConfig,
    run_sweep,
    scaling_survey,
    select_chain_strength,
    write_metrics_csv,
    write_survey_csv,
)
from .model import (
    AcceptRanges,
    IsingModel,
    ParseError,
    ground_states,
    ising_to_json_dict,
    parse_ising_json,
    parse_qubo_text,
    qubo_to_ising,
    write_qubo_text,
)
from .problems import (
    mkp_check,
    mkp_parse,
    qap_check,
    qap_parse,
)
from .reduction import (
    LinearConstraint,
    bce_encode,
    iem_reduce,
    perturbed_penalty,
    project_samples,
    reduction_to_json_dict,
)
from .sampling import (
    NoiseModel,
    SaParams,
    exact_sample,
    noisy_sample,
    parse_samples_csv,
    sa_inner,
    sa_sample,
    write_samples_csv,
)


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    return Path(path).read_text()


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _load_model(path: str, fmt: str | None) -> IsingModel:
    if fmt is None:
        fmt = "ising" if path.endswith(".json") else "qubo"
    text = _read(path)
    if fmt == "ising":
        return parse_ising_json(text)
    if fmt == "qubo":
        return qubo_to_ising(parse_qubo_text(text))
    raise ParseError(f"unknown model format {fmt!r}")


def _ranges(args) -> AcceptRanges:
    if getattr(args, "ranges", None):
        return AcceptRanges(*args.ranges)
    return AcceptRanges.dwave_advantage()


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------

def cmd_reduce_iem(args) -> int:
    model = _load_model(args.model, args.format)
    result = iem_reduce(model, args.bound)
    obj = reduction_to_json_dict(result)
    _write(args.out, json.dumps(obj, indent=2) + "\n")
    return 0


def cmd_reduce_bce(args) -> int:
    enc = bce_encode(args.lower, args.upper, args.mu, first_id=args.first_id)
    obj = {
        "lower": enc.lower,
        "upper": enc.upper,
        "coefficients": list(enc.coefficients),
        "variable_ids": list(enc.variable_ids),
    }
    _write(args.out, json.dumps(obj, indent=2) + "\n")
    return 0


def cmd_reduce_alm(args) -> int:
    obj = json.loads(_read(args.constraint))
    try:
        g = LinearConstraint(
            {int(k): float(v) for k, v in obj["terms"].items()},
            float(obj.get("constant", 0.0)),
            obj.get("domain", "binary"),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed constraint JSON: {exc}") from None
    qubo = perturbed_penalty(g, args.lam, args.epsilon)
    _write(args.out, write_qubo_text(qubo))
    return 0


def cmd_embed(args) -> int:
    model = _load_model(args.model, args.format)
    if args.chain_length is not None:
        hw, emb = chain_expand(model, args.chain_length, seed=args.seed)
    else:
        if not (args.embedding and args.hardware):
            raise ParseError("embed needs --embedding and --hardware, or --chain-length")
        emb = parse_embedding_json(_read(args.embedding))
        hw = parse_hardware_json(_read(args.hardware))
    embedded = assign_coefficients(model, emb, hw, args.chain_strength)
    obj = ising_to_json_dict(embedded.physical)
    obj["chain_strength"] = embedded.chain_strength
    obj["chains"] = {
        str(i): sorted(emb.chains[i]) for i in sorted(emb.chains)
    }
    obj["intra_chain_edges"] = [list(e) for e in sorted(embedded.intra_chain_edges)]
    _write(args.out, json.dumps(obj, indent=2) + "\n")
    if args.write_embedding:
        _write(args.write_embedding, write_embedding_json(emb))
    if args.write_hardware:
        _write(args.write_hardware, write_hardware_json(hw))
    return 0


def cmd_sample(args) -> int:
    model = _load_model(args.model, args.format)
    if args.sampler == "exact":
        samples = exact_sample(model, args.temperature, num_reads=args.reads, seed=args.seed)
    else:
        params = SaParams(
            num_reads=args.reads,
            sweeps=args.sweeps,
            beta_start=args.beta_start,
            beta_end=args.beta_end,
            seed=args.seed,
        )
        if args.noise_sigma_h > 0 or args.noise_sigma_j > 0:
            noise = NoiseModel(
                relative_sigma_h=args.noise_sigma_h,
                relative_sigma_j=args.noise_sigma_j,
                distribution=args.noise_dist,
                seed=args.seed,
            )
            samples = noisy_sample(model, _ranges(args), noise, sa_inner(params), args.reads)
        else:
            samples = sa_sample(model, params)
    _write(args.out, write_samples_csv(samples))
    return 0


def cmd_sweep(args) -> int:
    obj = json.loads(_read(args.config))
    config = SweepConfig.from_dict(obj)
    model = _load_model(obj["model"], obj.get("format"))
    chain_length = int(obj.get("chain_length", 1))
    embed_base_seed = int(obj.get("embedding_base_seed", 0))

    def embedder(logical, seed):
        return chain_expand(logical, chain_length, seed=embed_base_seed + seed)

    oracle = None
    options = MetricOptions(
        truncate_positive_to_zero=config.truncate_positive_to_zero,
        objective_sense=obj.get("objective_sense", "max"),
    )
    postprocess = None
    if obj.get("project_to_original"):
        original = _load_model(obj["project_to_original"], obj.get("format"))
        aux = {v: {"kind": "projected"} for v in model.variables if v not in set(original.variables)}
        postprocess = lambda s: project_samples(s, original, aux)  # noqa: E731
        if obj.get("oracle"):
            oracle = ground_states(original)[0]
    elif obj.get("oracle"):
        oracle = ground_states(model)[0]
    checker = None
    if obj.get("checker"):
        checker = _build_checker(obj["checker"])
    outcome = run_sweep(
        model, config, embedder, oracle=oracle, checker=checker,
        options=options, postprocess=postprocess,
    )
    csv_text = write_metrics_csv(
        outcome,
        instance=str(obj.get("instance", "")),
        method=str(obj.get("method", "")),
        param=str(obj.get("param", "")),
    )
    _write(args.out, csv_text)
    for line in outcome.diagnostics:
        print(f"warning: {line}", file=sys.stderr)
    if args.select:
        strength = select_chain_strength(
            list(outcome.pooled),
            rule=args.select,
            threshold=config.plateau_threshold,
        )
        print(f"selected chain strength: {strength!r}")
    return 0


def _build_checker(spec: dict):
    from .problems import mkp_checker, qap_checker

    fmt = spec.get("format")
    text = _read(spec["path"])
    if fmt == "mkp":
        return mkp_checker(mkp_parse(text))
    if fmt == "qap":
        return qap_checker(qap_parse(text))
    raise ParseError(f"unknown checker format {fmt!r}")


def cmd_survey(args) -> int:
    items = json.loads(_read(args.instances))
    ranges = _ranges(args)
    named = []
    plans = {}
    for item in items:
        name = item["name"]
        model = _load_model(item["path"], item.get("format"))
        named.append((name, model))
        plans[name] = item

    def embedding_for(name, model):
        item = plans[name]
        if item.get("embedding") and item.get("hardware"):
            return (
                parse_hardware_json(_read(item["hardware"])),
                parse_embedding_json(_read(item["embedding"])),
            )
        if item.get("chain_length"):
            return chain_expand(model, int(item["chain_length"]), seed=int(item.get("seed", 0)))
        return None

    rows = scaling_survey(named, ranges, embedding_for)
    _write(args.out, write_survey_csv(rows))
    return 0


def cmd_check(args) -> int:
    samples = parse_samples_csv(_read(args.samples))
    text = _read(args.instance)
    lines = ["assignment,occurrences,feasible,objective"]
    if args.fmt == "mkp":
        inst = mkp_parse(text)
        width = inst.n
        check = lambda bits: mkp_check(inst, bits)  # noqa: E731
    else:
        inst = qap_parse(text)
        width = inst.n * inst.n
        check = lambda bits: qap_check(inst, bits)  # noqa: E731
    for rec in samples.records:
        bits = [(rec.assignment.spin(v) + 1) // 2 for v in range(1, width + 1)]
        ok, obj = check(bits)
        spin_str = "".join("+1" if b else "-1" for b in bits)
        lines.append(f"{spin_str},{rec.occurrences},{int(ok)},{obj!r}")
    _write(args.out, "\n".join(lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="annealprep", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    reduce_p = sub.add_parser("reduce", help="coefficient-reduction transforms")
    reduce_sub = reduce_p.add_subparsers(dest="method", required=True, parser_class=_Parser)

    iem = reduce_sub.add_parser("iem", help="bound couplings via interaction extension")
    iem.add_argument("--model", required=True)
    iem.add_argument("--format", choices=["ising", "qubo"])
    iem.add_argument("--bound", type=float, required=True)
    iem.add_argument("--out")
    iem.set_defaults(func=cmd_reduce_iem)

    bce = reduce_sub.add_parser("bce", help="bounded-coefficient integer encoding")
    bce.add_argument("--lower", type=int, required=True)
    bce.add_argument("--upper", type=int, required=True)
    bce.add_argument("--mu", type=int, required=True)
    bce.add_argument("--first-id", type=int, default=0)
    bce.add_argument("--out")
    bce.set_defaults(func=cmd_reduce_bce)

    alm = reduce_sub.add_parser("alm", help="perturbed-penalty rewrite of a constraint")
    alm.add_argument("--constraint", required=True)
    alm.add_argument("--lam", type=float, required=True)
    alm.add_argument("--epsilon", type=float, default=0.0)
    alm.add_argument("--out")
    alm.set_defaults(func=cmd_reduce_alm)

    embed = sub.add_parser("embed", help="assign coefficients over an embedding")
    embed.add_argument("--model", required=True)
    embed.add_argument("--format", choices=["ising", "qubo"])
    embed.add_argument("--embedding")
    embed.add_argument("--hardware")
    embed.add_argument("--chain-length", type=int, dest="chain_length")
    embed.add_argument("--seed", type=int, default=0)
    embed.add_argument("--chain-strength", type=float, required=True, dest="chain_strength")
    embed.add_argument("--write-embedding", dest="write_embedding")
    embed.add_argument("--write-hardware", dest="write_hardware")
    embed.add_argument("--out")
    embed.set_defaults(func=cmd_embed)

    sample = sub.add_parser("sample", help="draw samples from a model")
    sample.add_argument("--model", required=True)
    sample.add_argument("--format", choices=["ising", "qubo"])
    sample.add_argument("--sampler", choices=["sa", "exact"], default="sa")
    sample.add_argument("--temperature", type=float, default=0.0)
    sample.add_argument("--reads", type=int, default=100)
    sample.add_argument("--sweeps", type=int, default=1000)
    sample.add_argument("--beta-start", type=float, default=0.1)
    sample.add_argument("--beta-end", type=float, default=10.0)
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--noise-sigma-h", type=float, default=0.0)
    sample.add_argument("--noise-sigma-j", type=float, default=0.0)
    sample.add_argument("--noise-dist", choices=["gaussian", "uniform"], default="gaussian")
    sample.add_argument("--ranges", type=float, nargs=4, metavar=("H_MIN", "H_MAX", "J_MIN", "J_MAX"))
    sample.add_argument("--out")
    sample.set_defaults(func=cmd_sample)

    sweep = sub.add_parser("sweep", help="chain-strength grid sweep from a config file")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--select", choices=["argmin_energy", "plateau", "plateau_threshold"])
    sweep.add_argument("--out")
    sweep.set_defaults(func=cmd_sweep)

    survey = sub.add_parser("survey", help="logical vs physical scaling-factor survey")
    survey.add_argument("--instances", required=True)
    survey.add_argument("--ranges", type=float, nargs=4, metavar=("H_MIN", "H_MAX", "J_MIN", "J_MAX"))
    survey.add_argument("--out")
    survey.set_defaults(func=cmd_survey)

    check = sub.add_parser("check", help="feasibility/objective of samples against an instance")
    check.add_argument("--format", choices=["mkp", "qap"], required=True, dest="fmt")
    check.add_argument("--instance", required=True)
    check.add_argument("--samples", required=True)
    check.add_argument("--out")
    check.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NoPlateauError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ParseError, EmbeddingError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
