"""CSV-in / JSON-out command-line front end.

Subcommands:

* fit      fit a model to a CSV and persist the posterior as JSON
* predict  evaluate a stored posterior on a CSV of feature rows
* select   fit a range of polynomial orders and report the bound profile
* demo     regenerate a bundled experiment as CSV/JSON artifacts

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
Every command is deterministic given its inputs and --seed; reruns produce
byte-identical outputs.
"""

import argparse
import json
import re
import sys

import numpy as np

from . import dataio
from .dataio import Dataset, LabelDataset, load_csv, save_csv
from .linear import (FitOptions, LinearPosterior, LinearPriors, fit_linear,
                     fit_linear_ard, predict_linear)
from .logit import (LogitPosterior, LogitPriors, fit_logit, fit_logit_ard,
                    fit_logit_iter, predict_logit)
from .modelsel import polynomial_design, select_model
from .numerics import FactorizationError

LINEAR_MODELS = ("linear", "linear-ard")
LOGIT_MODELS = ("logit", "logit-ard", "logit-iter")


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _fmt(v):
    return repr(float(v))


# ---------------------------------------------------------------------------
# posterior document


def posterior_to_document(post, priors_echo, feature_names):
    """JSON-ready dict for a fitted posterior; numbers keep full precision."""
    doc = {
        "model": post.variant,
        "w": [float(v) for v in post.w_n],
        "V": [[float(v) for v in row] for row in post.v_n],
        "invV": [[float(v) for v in row] for row in post.inv_v_n],
        "logdetV": float(post.logdet_v_n),
        "a_n": None if post.a_n is None else float(post.a_n),
        "b_n": _scalar_or_list(post.b_n),
        "elbo": float(post.elbo if isinstance(post, LinearPosterior)
                      else post.bound),
        "iterations": int(post.iterations),
        "converged": bool(post.converged),
        "priors": priors_echo,
        "feature_names": list(feature_names),
    }
    if isinstance(post, LinearPosterior):
        doc["c_n"] = float(post.c_n)
        doc["d_n"] = _scalar_or_list(post.d_n)
        doc["E_alpha"] = _scalar_or_list(post.e_alpha)
    elif post.e_alpha is not None:
        doc["E_alpha"] = _scalar_or_list(post.e_alpha)
    return doc


def _scalar_or_list(v):
    if v is None:
        return None
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        return float(arr)
    return [float(e) for e in arr]


def save_posterior(path, doc):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_posterior(path):
    """Rebuild a posterior object (and its document) from JSON."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    model = doc.get("model")
    w = np.asarray(doc["w"], dtype=float)
    v = np.asarray(doc["V"], dtype=float)
    inv_v = np.asarray(doc["invV"], dtype=float)
    if model in LINEAR_MODELS:
        post = LinearPosterior(
            w_n=w, v_n=v, inv_v_n=inv_v, logdet_v_n=doc["logdetV"],
            a_n=doc["a_n"], b_n=_maybe_array(doc["b_n"]),
            c_n=doc["c_n"], d_n=_maybe_array(doc["d_n"]),
            e_alpha=_maybe_array(doc["E_alpha"]),
            elbo=doc["elbo"], iterations=doc["iterations"],
            converged=doc["converged"], variant=model,
            bound_trace=None)
    elif model in LOGIT_MODELS:
        post = LogitPosterior(
            w_n=w, v_n=v, inv_v_n=inv_v, logdet_v_n=doc["logdetV"],
            e_alpha=_maybe_array(doc.get("E_alpha")),
            a_n=doc.get("a_n"), b_n=_maybe_array(doc.get("b_n")),
            xi=None, bound=doc["elbo"], iterations=doc["iterations"],
            converged=doc["converged"], variant=model)
    else:
        raise ValueError(f"{path}: unknown model tag {model!r}")
    return post, doc


def _maybe_array(v):
    if v is None:
        return None
    if isinstance(v, list):
        return np.asarray(v, dtype=float)
    return float(v)


# ---------------------------------------------------------------------------
# small shared helpers


def _load_feature_matrix(path):
    """Feature-only CSV: header plus numeric columns, no target."""
    import os
    if not os.path.exists(path):
        raise ValueError(f"no such file: {path}")
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty file")
    header = lines[0].split(",")
    rows = []
    for r, line in enumerate(lines[1:], start=1):
        cells = line.split(",")
        if len(cells) != len(header):
            raise ValueError(f"{path}: row {r} has {len(cells)} cells, "
                             f"expected {len(header)}")
        try:
            rows.append([float(c) for c in cells])
        except ValueError:
            raise ValueError(f"{path}: row {r}: unparseable cell") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float), header


def _write_table(path, names, columns):
    """CSV writer tolerating string cells and missing values."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(names) + "\n")
        for row in zip(*columns):
            fh.write(",".join(
                "" if cell is None
                else (cell if isinstance(cell, str) else _fmt(cell))
                for cell in row) + "\n")


def _linear_priors(args):
    return LinearPriors(a0=args.a0, b0=args.b0, c0=args.c0, d0=args.d0)


def _logit_priors(args):
    return LogitPriors(a0=args.a0, b0=args.b0)


def _opts(args):
    return FitOptions(rel_tol=args.tol, max_iter=args.max_iter)


def _priors_echo(args, model):
    if model in LINEAR_MODELS:
        return {"a0": args.a0, "b0": args.b0, "c0": args.c0, "d0": args.d0}
    if model == "logit-iter":
        return {}
    return {"a0": args.a0, "b0": args.b0}


def _parse_orders(text):
    m = re.fullmatch(r"(\d+)\.\.(\d+)", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
    elif re.fullmatch(r"\d+", text):
        lo = hi = int(text)
    else:
        raise _UsageError(f"cannot parse --orders {text!r}; expected a..b")
    if lo < 1 or hi < lo:
        raise _UsageError(f"invalid order range {text!r}")
    return list(range(lo, hi + 1))


# ---------------------------------------------------------------------------
# fit


def cmd_fit(args):
    data = load_csv(args.data, target_column=args.target)
    if args.model in LOGIT_MODELS:
        data = LabelDataset(x=data.x, y=data.y,
                            feature_names=data.feature_names)
    opts = _opts(args)
    if args.model == "linear":
        post = fit_linear(data, _linear_priors(args), opts)
    elif args.model == "linear-ard":
        post = fit_linear_ard(data, _linear_priors(args), opts)
    elif args.model == "logit":
        post = fit_logit(data, _logit_priors(args), opts)
    elif args.model == "logit-ard":
        post = fit_logit_ard(data, _logit_priors(args), opts)
    else:
        post = fit_logit_iter(data, opts)

    doc = posterior_to_document(post, _priors_echo(args, args.model),
                                data.feature_names)
    if args.out:
        save_posterior(args.out, doc)
    key = "elbo" if args.model in LINEAR_MODELS else "bound"
    print(f"{key}={_fmt(doc['elbo'])} iterations={doc['iterations']} "
          f"converged={str(doc['converged']).lower()}")
    return 0


# ---------------------------------------------------------------------------
# predict


def _emit_linear_predictions(path, preds):
    mu = [p.mu for p in preds]
    lam = [p.lam for p in preds]
    nu = [p.nu for p in preds]
    sd = [None if p.nu <= 2.0 else (p.nu / (p.lam * (p.nu - 2.0))) ** 0.5
          for p in preds]
    _write_table(path, ["mu", "lambda", "nu", "sd"], [mu, lam, nu, sd])


def cmd_predict(args):
    post, doc = load_posterior(args.posterior)
    x, _ = _load_feature_matrix(args.data)
    if x.shape[1] != len(doc["w"]):
        raise ValueError(f"{args.data}: {x.shape[1]} feature columns but the "
                         f"posterior has dimension {len(doc['w'])}")
    if doc["model"] in LINEAR_MODELS:
        _emit_linear_predictions(args.out, predict_linear(post, x))
    else:
        p = predict_logit(post, x)
        _write_table(args.out, ["p_pos"], [list(p)])
    print(f"wrote {x.shape[0]} predictions to {args.out}")
    return 0


# ---------------------------------------------------------------------------
# select


def cmd_select(args):
    data = load_csv(args.data, target_column=args.target)
    if data.d != 1:
        raise ValueError(f"{args.data}: model selection needs a single "
                         f"feature column, found {data.d}")
    if args.task == "logit":
        LabelDataset(x=data.x, y=data.y)   # label validation only
        priors = _logit_priors(args)
    else:
        priors = _linear_priors(args)
    orders = _parse_orders(args.orders)
    best, results = select_model(data.x[:, 0], data.y, orders, args.task,
                                 priors, _opts(args))
    for r in results:
        print(f"order={r.order} bound={_fmt(r.bound)}")
    print(f"winner={results[best].order}")
    if args.out:
        _write_table(args.out, ["order", "bound"],
                     [[float(r.order) for r in results],
                      [r.bound for r in results]])
    return 0


# ---------------------------------------------------------------------------
# demo


def _mse(a, b):
    return float(np.mean((np.asarray(a) - np.asarray(b)) ** 2))


def _loss01(pred_labels, y):
    return float(np.mean(np.asarray(pred_labels) != np.asarray(y)))


def _ols(x, y):
    return np.linalg.lstsq(x, y, rcond=None)[0]


def _fisher_ld(x, y, intercept_column):
    """Fisher's linear discriminant; returns (w, threshold)."""
    pos = y == 1.0
    if intercept_column:
        xp, xn = x[pos, 1:], x[~pos, 1:]
        pooled = np.cov(xp, rowvar=False) + np.cov(xn, rowvar=False)
        diff = xp.mean(axis=0) - xn.mean(axis=0)
        w_rest = np.linalg.solve(np.atleast_2d(pooled), diff)
        w0 = -0.5 * float((xp.mean(axis=0) + xn.mean(axis=0)) @ w_rest)
        return np.concatenate([[w0], w_rest]), 0.0
    xp, xn = x[pos], x[~pos]
    pooled = np.cov(xp, rowvar=False) + np.cov(xn, rowvar=False)
    diff = xp.mean(axis=0) - xn.mean(axis=0)
    w = np.linalg.solve(np.atleast_2d(pooled), diff)
    c = 0.5 * float((xp.mean(axis=0) + xn.mean(axis=0)) @ w)
    return w, c


def _linear_method_rows(outdir, train, test, fits, baselines):
    rows = []
    for tag, post in fits:
        mu_tr = np.asarray([p.mu for p in predict_linear(post, train.x)])
        preds_te = predict_linear(post, test.x)
        mu_te = np.asarray([p.mu for p in preds_te])
        save_posterior(f"{outdir}/posterior_{tag}.json",
                       posterior_to_document(post, {}, train.feature_names))
        _emit_linear_predictions(f"{outdir}/pred_{tag}.csv", preds_te)
        rows.append((tag, _mse(train.y, mu_tr), _mse(test.y, mu_te)))
    if baselines:
        w = _ols(train.x, train.y)
        rows.append(("ols", _mse(train.y, train.x @ w),
                     _mse(test.y, test.x @ w)))
    return rows


def _logit_method_rows(outdir, train, test, fits, baselines,
                       fld_intercept=True):
    rows = []
    for tag, post in fits:
        p_tr = predict_logit(post, train.x)
        p_te = predict_logit(post, test.x)
        save_posterior(f"{outdir}/posterior_{tag}.json",
                       posterior_to_document(post, {}, train.feature_names))
        _write_table(f"{outdir}/pred_{tag}.csv", ["p_pos"], [list(p_te)])
        rows.append((tag,
                     _loss01(2.0 * (p_tr > 0.5) - 1.0, train.y),
                     _loss01(2.0 * (p_te > 0.5) - 1.0, test.y)))
    if baselines:
        w, c = _fisher_ld(train.x, train.y, intercept_column=fld_intercept)
        rows.append(("fld",
                     _loss01(2.0 * (train.x @ w > c) - 1.0, train.y),
                     _loss01(2.0 * (test.x @ w > c) - 1.0, test.y)))
    return rows


def _write_metrics(outdir, rows, kind):
    names = ["method", f"train_{kind}", f"test_{kind}"]
    _write_table(f"{outdir}/metrics.csv", names,
                 [[r[0] for r in rows], [r[1] for r in rows],
                  [r[2] for r in rows]])


def _demo_coeff(args, outdir):
    _, train, test = dataio.gen_linear_coeff(
        args.seed, n=args.n or 100, n_test=args.n_test or 50)
    dataio.save_dataset(f"{outdir}/train.csv", train)
    dataio.save_dataset(f"{outdir}/test.csv", test)
    rows = _linear_method_rows(outdir, train, test,
                               [("vb", fit_linear(train))], args.baselines)
    _write_metrics(outdir, rows, "mse")


def _demo_highdim(args, outdir):
    d = args.d or 100
    _, train, test = dataio.gen_linear_sparse(
        args.seed, d=d, d_eff=args.d_eff or d,
        n=args.n or 150, n_test=args.n_test or 50)
    dataio.save_dataset(f"{outdir}/train.csv", train)
    dataio.save_dataset(f"{outdir}/test.csv", test)
    rows = _linear_method_rows(outdir, train, test,
                               [("vb", fit_linear(train))], args.baselines)
    _write_metrics(outdir, rows, "mse")


def _demo_sparse(args, outdir):
    _, train, test = dataio.gen_linear_sparse(
        args.seed, d=args.d or 200, d_eff=args.d_eff or 20,
        n=args.n or 150, n_test=args.n_test or 50)
    dataio.save_dataset(f"{outdir}/train.csv", train)
    dataio.save_dataset(f"{outdir}/test.csv", test)
    rows = _linear_method_rows(
        outdir, train, test,
        [("vb", fit_linear(train)), ("vb_ard", fit_linear_ard(train))],
        args.baselines)
    _write_metrics(outdir, rows, "mse")


def _demo_modelsel(args, outdir):
    _, train, test = dataio.gen_polynomial(
        args.seed, order_plus_one=3, n=args.n or 10,
        n_test=args.n_test or 100, kind="linear")
    scalar_train = train.x[:, 1]
    scalar_test = test.x[:, 1]
    dataio.save_csv(f"{outdir}/train.csv", ["x", "y"], [scalar_train, train.y])
    dataio.save_csv(f"{outdir}/test.csv", ["x", "y"], [scalar_test, test.y])
    orders = _parse_orders(args.orders or "1..10")
    best, results = select_model(scalar_train, train.y, orders, "linear")
    _write_table(f"{outdir}/selection.csv", ["order", "bound"],
                 [[float(r.order) for r in results],
                  [r.bound for r in results]])
    k = results[best].order
    post = results[best].posterior
    rows = _linear_method_rows(
        outdir,
        Dataset(x=polynomial_design(scalar_train, k), y=train.y),
        Dataset(x=polynomial_design(scalar_test, k), y=test.y),
        [("vb", post)], baselines=False)
    if args.baselines:
        k_ml = 6
        w = _ols(polynomial_design(scalar_train, k_ml), train.y)
        rows.append(("ols",
                     _mse(train.y, polynomial_design(scalar_train, k_ml) @ w),
                     _mse(test.y, polynomial_design(scalar_test, k_ml) @ w)))
    _write_metrics(outdir, rows, "mse")
    print(f"selected_order={k}")


def _demo_logit_coeff(args, outdir):
    _, train, test = dataio.gen_logit_plane(
        args.seed, n=args.n or 100, n_test=args.n_test or 1000)
    dataio.save_dataset(f"{outdir}/train.csv", train)
    dataio.save_dataset(f"{outdir}/test.csv", test)
    rows = _logit_method_rows(
        outdir, train, test,
        [("vb", fit_logit(train)), ("vb_iter", fit_logit_iter(train))],
        args.baselines, fld_intercept=True)
    _write_metrics(outdir, rows, "01")


def _demo_logit_highdim(args, outdir):
    _, train, test = dataio.gen_logit_sparse(
        args.seed, d=args.d or 200, d_eff=args.d_eff or 20,
        n=args.n or 1000, n_test=args.n_test or 2000)
    dataio.save_dataset(f"{outdir}/train.csv", train)
    dataio.save_dataset(f"{outdir}/test.csv", test)
    rows = _logit_method_rows(
        outdir, train, test,
        [("vb", fit_logit(train)), ("vb_iter", fit_logit_iter(train)),
         ("vb_ard", fit_logit_ard(train))],
        args.baselines, fld_intercept=False)
    _write_metrics(outdir, rows, "01")


def _demo_logit_modelsel(args, outdir):
    _, train, test = dataio.gen_polynomial(
        args.seed, order_plus_one=3, n=args.n or 50,
        n_test=args.n_test or 300, kind="logit")
    scalar_train = train.x[:, 1]
    scalar_test = test.x[:, 1]
    dataio.save_csv(f"{outdir}/train.csv", ["x", "y"], [scalar_train, train.y])
    dataio.save_csv(f"{outdir}/test.csv", ["x", "y"], [scalar_test, test.y])
    orders = _parse_orders(args.orders or "1..10")
    best, results = select_model(scalar_train, train.y, orders, "logit")
    _write_table(f"{outdir}/selection.csv", ["order", "bound"],
                 [[float(r.order) for r in results],
                  [r.bound for r in results]])
    k = results[best].order
    post = results[best].posterior
    rows = _logit_method_rows(
        outdir,
        LabelDataset(x=polynomial_design(scalar_train, k), y=train.y),
        LabelDataset(x=polynomial_design(scalar_test, k), y=test.y),
        [("vb", post)], baselines=False)
    if args.baselines:
        k_ld = 6
        w, c = _fisher_ld(polynomial_design(scalar_train, k_ld), train.y,
                          intercept_column=True)
        xtr = polynomial_design(scalar_train, k_ld)
        xte = polynomial_design(scalar_test, k_ld)
        rows.append(("fld",
                     _loss01(2.0 * (xtr @ w > c) - 1.0, train.y),
                     _loss01(2.0 * (xte @ w > c) - 1.0, test.y)))
    _write_metrics(outdir, rows, "01")
    print(f"selected_order={k}")


_EXAMPLES = {
    "coeff": _demo_coeff,
    "highdim": _demo_highdim,
    "sparse": _demo_sparse,
    "modelsel": _demo_modelsel,
    "logit-coeff": _demo_logit_coeff,
    "logit-highdim": _demo_logit_highdim,
    "logit-modelsel": _demo_logit_modelsel,
}


def cmd_demo(args):
    import os
    runner = _EXAMPLES.get(args.example)
    if runner is None:
        raise _UsageError(f"unknown example {args.example!r}; choose from "
                          + ", ".join(sorted(_EXAMPLES)))
    os.makedirs(args.outdir, exist_ok=True)
    runner(args, args.outdir)
    print(f"example {args.example} written to {args.outdir}")
    return 0


# ---------------------------------------------------------------------------
# argument wiring


def _add_prior_flags(p):
    p.add_argument("--a0", type=float, default=1e-2)
    p.add_argument("--b0", type=float, default=1e-4)
    p.add_argument("--c0", type=float, default=1e-2)
    p.add_argument("--d0", type=float, default=1e-4)
    p.add_argument("--tol", type=float, default=1e-5)
    p.add_argument("--max-iter", type=int, default=500)


def _build_parser():
    parser = _Parser(prog="vbreg", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True,
                                parser_class=_Parser)

    p = sub.add_parser("fit", help="fit a model to a CSV dataset")
    p.add_argument("--model", required=True,
                   choices=LINEAR_MODELS + LOGIT_MODELS)
    p.add_argument("--data", required=True)
    p.add_argument("--target", default=None)
    _add_prior_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="predict from a stored posterior")
    p.add_argument("--posterior", required=True)
    p.add_argument("--data", required=True,
                   help="CSV of feature rows (no target column)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("select", help="bound-based polynomial order selection")
    p.add_argument("--task", required=True, choices=("linear", "logit"))
    p.add_argument("--data", required=True,
                   help="CSV with one feature column plus the target")
    p.add_argument("--target", default=None)
    p.add_argument("--orders", required=True, help="range a..b")
    _add_prior_flags(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("demo", help="regenerate a bundled experiment")
    p.add_argument("--example", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outdir", required=True)
    p.add_argument("--baselines", action="store_true")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--n-test", type=int, default=None)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--d-eff", type=int, default=None)
    p.add_argument("--orders", default=None)
    p.set_defaults(func=cmd_demo)

    return parser


def main(argv=None):
    try:
        args = _build_parser().parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"vbreg: usage error: {exc}", file=sys.stderr)
        return 1
    except (FactorizationError, FloatingPointError, RuntimeError) as exc:
        print(f"vbreg: numerical failure: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"vbreg: data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
