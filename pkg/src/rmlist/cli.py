"""Command-line entry point.

Every run first prints ``# config: <json>``, the fully resolved
configuration including the seed.  That line can be saved to a file and
passed back with ``--config`` to reproduce the run byte for byte.
"""

import argparse
import json
import re
import sys

import numpy as np
import yaml

from rmlist.code_tree import ParameterError, min_distance, tree_from_spec
from rmlist.decoder import ListSchedule, list_decode
from rmlist.encoder import encode, xor_count
from rmlist.sim import SimConfig, csv_text, ml_agreement, sweep, theoretical_first_bits
from rmlist.validation import check_sigma

COMMANDS = ("info", "encode", "decode", "simulate", "check-ml", "theory")
ECHO_PREFIX = "# config: "
CONFIG_KEYS = {"command", "seed", "workers", "out", "code", "decoder", "input", "sim", "check", "theory"}

BIT_FORMATS = """\
bit strings: binary words are runs of 0/1 ("0110"); hex words carry the
k information bits most significant first, left padded with zeros to a
whole number of hex digits ("0x2f" or "2f"). Separate words with
whitespace or newlines."""


class CLIError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(f"{message} (see --help)")


def _csv_list(cast):
    def parse(text):
        try:
            return [cast(x) for x in re.split(r"[,\s]+", text.strip()) if x]
        except ValueError as exc:
            raise argparse.ArgumentTypeError(f"bad list {text!r}: {exc}") from exc

    return parse


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="YAML or JSON config file; a saved '# config:' line also works")
    common.add_argument("--seed", type=int, help="master seed; generated and printed when absent")
    common.add_argument("--workers", type=int, help="worker processes for simulate")
    common.add_argument("--out", help="write results here instead of standard output")

    code = _Parser(add_help=False)
    code.add_argument("--code", choices=("rm", "quad", "custom"), help="code family (default rm)")
    code.add_argument("-m", "--m", type=int, help="log2 of the block length")
    code.add_argument("-r", "--r", type=int, help="code order")
    code.add_argument("--termination", choices=("partial", "full"))
    code.add_argument("--ordering", choices=("standard", "chained"), help="for --code quad")
    code.add_argument("--freeze-leading", type=int, help="freeze this many leading information bits")
    code.add_argument("--freezing", type=_csv_list(int), help="per-leaf frozen prefix lengths, e.g. 3,0,0")

    dec = _Parser(add_help=False)
    dec.add_argument("-L", "--L", type=int, help="list size (default 1)")
    dec.add_argument("--full-leaf-factor", type=int, help="list multiplier at full-space leaves")
    dec.add_argument("--leaf-L", type=_csv_list(int), help="per-leaf list sizes in decoding order")

    parser = _Parser(
        prog="rmlist",
        description="Recursive list decoding of Reed-Muller codes.",
        epilog=BIT_FORMATS,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    fmt = argparse.RawDescriptionHelpFormatter

    sub.add_parser("info", parents=[common, code], help="code parameters and leaf schedule", formatter_class=fmt)

    p = sub.add_parser("encode", parents=[common, code], help="information bits to codewords",
                       epilog=BIT_FORMATS, formatter_class=fmt)
    p.add_argument("bits", nargs="*", help="words to encode; read from --input or stdin when omitted")
    p.add_argument("--input", help="file with words ('-' for stdin)")
    p.add_argument("--format", choices=("auto", "bin", "hex"), help="input word format (default auto)")

    p = sub.add_parser("decode", parents=[common, code, dec], help="soft values to information bits",
                       epilog="values: n numbers per word, separated by commas or whitespace.\n" + BIT_FORMATS,
                       formatter_class=fmt)
    p.add_argument("values", nargs="*", help="soft values; read from --input or stdin when omitted")
    p.add_argument("--input", help="file with values ('-' for stdin)")
    p.add_argument("--kind", choices=("eps", "y", "llr"), help="eps = Pr0-Pr1 (default), y = channel output, llr")
    p.add_argument("--sigma", type=float, help="noise level, needed for --kind y")
    p.add_argument("--list", action="store_true", default=None, help="also print every surviving path")

    p = sub.add_parser("simulate", parents=[common, code, dec], help="Monte Carlo BER/BLER sweep (CSV)")
    p.add_argument("--grid", type=_csv_list(float), help="SNR points in dB, e.g. 1,2,3")
    p.add_argument("--convention", choices=("ebno", "snr"), help="grid is Eb/N0 (default) or Es/N0")
    p.add_argument("--trials", type=int, help="trials per point (maximum when early stopping)")
    p.add_argument("--target-errors", type=int, help="stop a point after this many block errors; 0 disables")
    p.add_argument("--chunk", type=int, help="trials per work unit")
    p.add_argument("--all-zero", action="store_true", default=None, help="always send the all-zero word")

    p = sub.add_parser("check-ml", parents=[common, code, dec], help="decoder against exhaustive ML")
    p.add_argument("--sigma", type=_csv_list(float), help="noise levels, e.g. 0.7,1.0,1.4")
    p.add_argument("--trials", type=int, help="trials per noise level")
    p.add_argument("--show", type=int, help="disagreements to print per noise level (default 5)")

    p = sub.add_parser("theory", parents=[common], help="asymptotic first-leaf error estimates")
    p.add_argument("-m", "--m", type=_csv_list(int), help="lengths, e.g. 6,7,8")
    p.add_argument("-r", "--r", type=_csv_list(int), help="orders")
    p.add_argument("--sigma", type=_csv_list(float), help="noise levels")
    return parser


# ---------------------------------------------------------------------------
# configuration


def load_config(path):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise CLIError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    text = text.strip()
    if text.startswith(ECHO_PREFIX.strip()):
        text = text[len(ECHO_PREFIX.strip()) :].splitlines()[0]
    try:
        data = yaml.safe_load(text) if text else {}
    except yaml.YAMLError as exc:
        raise CLIError(f"malformed config {path}: {str(exc).splitlines()[0]}") from exc
    if not isinstance(data, dict):
        raise CLIError(f"config {path} must hold a mapping at the top level")
    return data


def _set(section, key, value):
    if value is not None:
        section[key] = value


def resolve(args):
    """Merge defaults, the config file and explicit flags (in that order)."""
    cfg = load_config(args.config) if args.config else {}
    unknown = set(cfg) - CONFIG_KEYS
    if unknown:
        raise CLIError(f"unknown config keys: {', '.join(sorted(unknown))}")
    if cfg.get("command", args.command) != args.command:
        raise CLIError(f"config is for '{cfg['command']}', not '{args.command}'")
    cfg["command"] = args.command
    _set(cfg, "seed", args.seed)
    _set(cfg, "workers", args.workers)
    _set(cfg, "out", args.out)
    if "seed" not in cfg:
        cfg["seed"] = int(np.random.SeedSequence().entropy % 2**32)
    cfg.setdefault("workers", 1)

    cmd = args.command
    if cmd != "theory":
        code = dict(cfg.get("code") or {})
        _set(code, "type", args.code)
        _set(code, "m", args.m)
        _set(code, "r", args.r)
        _set(code, "termination", args.termination)
        _set(code, "ordering", args.ordering)
        _set(code, "freeze_leading", args.freeze_leading)
        _set(code, "freezing", args.freezing)
        code.setdefault("type", "rm")
        if code["type"] != "custom":
            code.setdefault("termination", "partial")
            if code["type"] == "quad":
                code.setdefault("ordering", "standard")
            if "m" not in code or "r" not in code:
                raise CLIError("a code needs -m and -r (or a code section in --config)")
        cfg["code"] = code
    if cmd in ("decode", "simulate", "check-ml"):
        dec = dict(cfg.get("decoder") or {})
        _set(dec, "L", args.L)
        _set(dec, "full_leaf_factor", args.full_leaf_factor)
        _set(dec, "leaf_L", args.leaf_L)
        cfg["decoder"] = dec

    if cmd == "encode":
        inp = dict(cfg.get("input") or {})
        _set(inp, "format", args.format)
        inp.setdefault("format", "auto")
        text = _read_text(args.bits, args.input)
        if text is not None:
            inp["text"] = text
        if "text" not in inp:
            raise CLIError("no words to encode; pass them as arguments, with --input, or on stdin")
        cfg["input"] = inp
    elif cmd == "decode":
        inp = dict(cfg.get("input") or {})
        _set(inp, "kind", args.kind)
        _set(inp, "sigma", args.sigma)
        _set(inp, "list", args.list)
        inp.setdefault("kind", "eps")
        inp.setdefault("list", False)
        text = _read_text(args.values, args.input)
        if text is not None:
            inp["text"] = text
        if "text" not in inp:
            raise CLIError("no values to decode; pass them as arguments, with --input, or on stdin")
        if inp["kind"] == "y" and inp.get("sigma") is None:
            raise CLIError("--kind y needs --sigma")
        cfg["input"] = inp
    elif cmd == "simulate":
        sim = dict(cfg.get("sim") or {})
        _set(sim, "grid", args.grid)
        _set(sim, "convention", args.convention)
        _set(sim, "trials", args.trials)
        if args.target_errors is not None:
            sim["target_errors"] = args.target_errors or None
        _set(sim, "chunk", args.chunk)
        _set(sim, "all_zero", args.all_zero)
        if "grid" not in sim:
            raise CLIError("simulate needs --grid (or sim.grid in --config)")
        defaults = SimConfig.__dataclass_fields__
        for key in ("convention", "trials", "target_errors", "chunk", "all_zero"):
            sim.setdefault(key, defaults[key].default)
        cfg["sim"] = sim
    elif cmd == "check-ml":
        chk = dict(cfg.get("check") or {})
        _set(chk, "sigma", args.sigma)
        _set(chk, "trials", args.trials)
        _set(chk, "show", args.show)
        chk.setdefault("sigma", [0.7, 1.0, 1.4])
        chk.setdefault("trials", 10_000)
        chk.setdefault("show", 5)
        cfg["check"] = chk
    elif cmd == "theory":
        th = dict(cfg.get("theory") or {})
        _set(th, "m", args.m)
        _set(th, "r", args.r)
        _set(th, "sigma", args.sigma)
        for key in ("m", "r", "sigma"):
            if key not in th:
                raise CLIError(f"theory needs --{key}")
            if not isinstance(th[key], list):
                th[key] = [th[key]]
        cfg["theory"] = th
    return cfg


def _read_text(items, path):
    if items:
        return " ".join(items)
    if path is None:
        if sys.stdin is None or sys.stdin.isatty():
            return None
        path = "-"
    if path == "-":
        text = sys.stdin.read()
        return text if text.strip() else None
    try:
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise CLIError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _schedule(cfg, tree):
    dec = cfg.get("decoder") or {}
    if dec.get("L") == "unpruned":
        return ListSchedule.unpruned(tree)
    sched = ListSchedule(**dec)
    sched.caps(tree)
    return sched


# ---------------------------------------------------------------------------
# bit-string formats


def parse_words(text, k, fmt="auto"):
    """Parse whitespace-separated words into a ``(count, k)`` bit array."""
    words = text.split()
    if not words:
        raise ParameterError("no words found in the input")
    out = np.zeros((len(words), k), dtype=np.uint8)
    for i, word in enumerate(words):
        out[i] = _parse_word(word, k, fmt)
    return out


def _parse_word(word, k, fmt):
    is_hex = word.lower().startswith("0x")
    body = word[2:] if is_hex else word
    if fmt == "bin" or (fmt == "auto" and not is_hex and set(body) <= {"0", "1"} and len(body) == k):
        if len(body) != k or not set(body) <= {"0", "1"}:
            raise ParameterError(f"binary word {word!r} must be {k} characters of 0/1")
        return np.frombuffer(body.encode(), dtype=np.uint8) - ord("0")
    digits = -(-k // 4)
    if len(body) != digits or not re.fullmatch(r"[0-9a-fA-F]*", body):
        raise ParameterError(f"word {word!r} is neither {k} binary digits nor {digits} hex digits")
    value = int(body, 16) if body else 0
    if value >> k:
        raise ParameterError(f"hex word {word!r} has more than {k} significant bits")
    return np.array([(value >> (k - 1 - j)) & 1 for j in range(k)], dtype=np.uint8)


def bits_text(bits):
    return "".join("1" if b else "0" for b in np.asarray(bits).ravel())


# ---------------------------------------------------------------------------
# commands


def cmd_info(cfg, out):
    tree = tree_from_spec(cfg["code"])
    d, exact = min_distance(tree)
    d_text = "inf" if d == float("inf") else str(int(d))
    out.write(f"n={tree.n} k={tree.k} d={d_text} ({'exact' if exact else 'lower bound'})\n")
    out.write(f"rate={tree.k / tree.n!r} leaves={len(tree.leaves)} xor_count={xor_count(tree)}\n")
    out.write("leaf schedule (decoding order):\n")
    out.write(tree.describe() + "\n")
    return 0


def cmd_encode(cfg, out):
    tree = tree_from_spec(cfg["code"])
    info = parse_words(cfg["input"]["text"], tree.k, cfg["input"]["format"])
    for cw in encode(tree, info):
        out.write(bits_text(cw) + "\n")
    return 0


def cmd_decode(cfg, out):
    tree = tree_from_spec(cfg["code"])
    inp = cfg["input"]
    try:
        values = np.array([float(x) for x in re.split(r"[,\s]+", inp["text"].strip()) if x])
    except ValueError as exc:
        raise ParameterError(f"bad soft value: {exc}") from exc
    if values.size == 0 or values.size % tree.n:
        raise ParameterError(f"got {values.size} values, expected a multiple of n={tree.n}")
    values = values.reshape(-1, tree.n)
    kind = inp["kind"]
    if kind == "y":
        sigma = check_sigma(inp["sigma"])
        values, kind = 2.0 * values / sigma**2, "llr"
    res = list_decode(tree, values, _schedule(cfg, tree), llr=kind == "llr")
    for b in range(values.shape[0]):
        out.write(f"info={bits_text(res.info[b])} codeword={bits_text(res.codeword[b])} cost={float(res.cost[b])!r}\n")
        if inp["list"]:
            for j in range(res.list_info.shape[1]):
                out.write(
                    f"  path {j}: info={bits_text(res.list_info[b, j])} "
                    f"codeword={bits_text(res.list_codeword[b, j])} cost={float(res.list_cost[b, j])!r}\n"
                )
    return 0


def cmd_simulate(cfg, out):
    sim = SimConfig.from_mapping({k: cfg[k] for k in ("code", "decoder", "sim", "seed", "workers")})
    out.write(csv_text(sweep(sim), sim))
    return 0


def cmd_check_ml(cfg, out):
    tree = tree_from_spec(cfg["code"])
    dec = cfg.get("decoder") or {}
    sched = None if not dec else _schedule(cfg, tree)
    chk = cfg["check"]
    status = 0
    for sigma in chk["sigma"]:
        res = ml_agreement(tree, check_sigma(sigma), int(chk["trials"]), cfg["seed"], sched)
        ok = res.agree == res.trials
        status |= not ok
        out.write(f"{'PASS' if ok else 'FAIL'} sigma={sigma!r} trials={res.trials} agree={res.agree}\n")
        for trial, d_info, m_info, d_cost, m_cost in res.disagreements[: int(chk["show"])]:
            out.write(
                f"  trial {trial}: decoder info={bits_text(d_info)} cost={d_cost!r}; "
                f"ML info={bits_text(m_info)} cost={m_cost!r}\n"
            )
    return int(status)


def cmd_theory(cfg, out):
    th = cfg["theory"]
    out.write("m,r,sigma,P1,P2,P_old\n")
    for m in th["m"]:
        for r in th["r"]:
            for sigma in th["sigma"]:
                est = theoretical_first_bits(int(m), int(r), float(sigma))
                out.write(f"{m},{r},{float(sigma)!r},{est.P1!r},{est.P2!r},{est.P_old!r}\n")
    return 0


HANDLERS = {
    "info": cmd_info,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "simulate": cmd_simulate,
    "check-ml": cmd_check_ml,
    "theory": cmd_theory,
}


def run(argv=None, stdout=None):
    """Run one command; return the process exit status."""
    stdout = sys.stdout if stdout is None else stdout
    try:
        args = build_parser().parse_args(argv)
        cfg = resolve(args)
        stdout.write(ECHO_PREFIX + json.dumps(cfg, sort_keys=True) + "\n")
        path = cfg.get("out")
        if path is None:
            return HANDLERS[cfg["command"]](cfg, stdout)
        try:
            fh = open(path, "w", newline="")
        except OSError as exc:
            raise CLIError(f"cannot write {path}: {exc.strerror or exc}") from exc
        with fh:
            return HANDLERS[cfg["command"]](cfg, fh)
    except (CLIError, ParameterError, ValueError, TypeError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        sys.stderr.write(f"rmlist: error: {msg}\n")
        return 2


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
