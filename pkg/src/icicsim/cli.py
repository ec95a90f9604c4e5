"""Command-line front end.

  icicsim simulate --config cfg.txt --out results/ [overrides]
  icicsim verify   [--quick]          cross-check battery, exit 3 on failure
  icicsim gapbench [--instances N]    certified-gap benchmark vs exhaustion

Exit codes: 0 success, 2 configuration error, 3 acceptance failure.
"""

import argparse
import sys

import numpy as np


def _cmd_simulate(args):
    from .simulate import ConfigError, emit_reports, load_config, run_simulation

    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.scenario.seed = args.seed
        if args.scheme is not None:
            cfg.scheme = args.scheme
        if args.alpha is not None:
            cfg.scheduler.mode = "alpha_fair"
            cfg.scheduler.alpha = args.alpha
        if args.niter is not None:
            cfg.icic.n_iter = args.niter
        if args.rho is not None:
            cfg.icic.rho = args.rho
        cfg.validate()
        cfg.icic.__post_init__()
        cfg.scheduler.__post_init__()
    except (ConfigError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    report = run_simulation(cfg)
    files = emit_reports(report, args.out)
    print(f"wrote {len(files)} files to {args.out}")
    for p, v in sorted(report.percentiles.items()):
        print(f"  {p:5.1f}th percentile throughput: {v:.6f} bit/s/Hz")
    return 0


def _cmd_verify(args):
    from . import coordinator as co
    from . import mcnf, oracle
    from .instances import instance_triples, random_desk_instance

    quick = args.quick
    failures = []

    def check(name, ok):
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
        if not ok:
            failures.append(name)

    rep = oracle.sinr_bound_factor_check(2_000 if quick else 10_000, seed=11)
    check("sinr bound factor identity",
          rep.max_identity_error < 1e-9 and rep.bound_violations == 0
          and rep.exactness_violations == 0)

    ok = all(oracle.set_equivalence_check(m, kt)
             for m in (1, 2, 3) for kt in (1, 2, 3))
    check("credit-set equivalence (binary enumeration)", ok)

    rng = np.random.default_rng(5)
    ok = True
    for _ in range(30 if quick else 150):
        m, kt = int(rng.integers(1, 4)), int(rng.integers(1, 3))
        w = rng.uniform(0.2, 2.0, m)
        r = rng.uniform(0.0, 500.0, m)
        rtil = rng.uniform(0.0, 400.0, (m, kt))
        own = float(rng.integers(0, 2))
        nbr = rng.integers(0, 2, kt).astype(float)
        got = co.solve_subproblem(own, nbr, w, r, rtil).phi
        ref = oracle.subproblem_enumeration(own, nbr, w, r, rtil)[2]
        ok &= got == ref
    check("flow subproblem equals binary enumeration", ok)

    ok = True
    for s in range(3 if quick else 10):
        inst = random_desk_instance(n_sectors=6, users_per_sector=2,
                                    n_rbs=1, k_tilde=2, seed=40 + s)
        prob = co.problem_from_instance(inst)
        nmap = inst.neighbors

        def value_and_duals(i_vec):
            tot, le, ln = 0.0, np.zeros((6, 1)), np.zeros((6, 1, 2))
            for k in range(6):
                s_ = co.solve_subproblem(
                    i_vec[k, 0], i_vec[nmap.nbr[k], 0],
                    prob.weights[k] / 100.0, prob.triples.r[k][:, 0],
                    prob.triples.rtil[k][:, 0, :])
                tot += s_.phi
                le[k, 0] = s_.lam_eq
                ln[k, 0, :] = s_.lam_nbr
            return tot, le, ln

        i0 = np.random.default_rng(s).random((6, 1))
        v0, le, ln = value_and_duals(i0)
        grad = co.compute_subgradient(le, ln, nmap)
        for t in range(10 if quick else 25):
            i1 = np.random.default_rng(1000 + s * 100 + t).random((6, 1))
            v1, _, _ = value_and_duals(i1)
            ok &= v1 <= v0 + float(np.sum(grad * (i1 - i0))) + 1e-6
    check("master subgradient inequality", ok)

    ok = True
    rng = np.random.default_rng(9)
    for _ in range(10 if quick else 40):
        sup = np.zeros(5)
        sup[0] = float(rng.integers(1, 3))
        sup[4] = -sup[0]
        net = mcnf.FlowNetwork(supply=sup)
        for _ in range(9):
            i, j = rng.choice(5, 2, replace=False)
            net.add_arc(int(i), int(j), float(rng.integers(1, 3)),
                        float(rng.integers(-3, 6)))
        try:
            sol = mcnf.solve(net)
        except (mcnf.InfeasibleFlowError, mcnf.NegativeCycleError):
            continue
        ok &= not mcnf.verify(net, sol)
        ok &= abs(oracle.lp_flow_reference(net) - sol.objective) < 1e-7
    check("flow solver against dense LP", ok)

    print(f"{len(failures)} failure(s)")
    return 3 if failures else 0


def _cmd_gapbench(args):
    from . import coordinator as co
    from . import oracle
    from .instances import instance_triples, random_desk_instance

    gaps = {1: [], 2: []}
    for s in range(args.instances):
        inst = random_desk_instance(n_sectors=12, users_per_sector=2,
                                    n_rbs=2, k_tilde=2, seed=args.seed + s)
        triples = instance_triples(inst)
        exh = oracle.exhaustive_bound(inst, triples)
        prob = co.problem_from_instance(inst)
        for runs in (1, 2):
            res = co.run_coordination(
                prob, co.IcicConfig(n_iter=args.niter, runs=runs))
            gaps[runs].append(100.0 * (exh.value - res.gap.p_hat) / exh.value)

    print("runs  mean_gap_pct  std_gap_pct   (vs exhaustive bound optimum, "
          f"{args.instances} instances)")
    for runs in (1, 2):
        g = np.array(gaps[runs])
        print(f"{runs:4d}  {g.mean():12.3f}  {g.std():11.3f}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write("instance,runs,gap_pct\n")
            for runs in (1, 2):
                for i, g in enumerate(gaps[runs]):
                    fh.write(f"{i},{runs},{g!r}\n")
    ok = np.mean(gaps[1]) <= 8.0 and np.mean(gaps[2]) < np.mean(gaps[1])
    return 0 if ok else 3


def main(argv=None):
    parser = argparse.ArgumentParser(prog="icicsim", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="run a configured Monte Carlo")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.add_argument("--seed", type=int)
    p_sim.add_argument("--scheme",
                       choices=["proposed", "reuse1", "reuse3", "pfr"])
    p_sim.add_argument("--alpha", type=float)
    p_sim.add_argument("--niter", type=int)
    p_sim.add_argument("--rho", type=int)
    p_sim.set_defaults(func=_cmd_simulate)

    p_ver = sub.add_parser("verify", help="oracle/property cross-checks")
    p_ver.add_argument("--quick", action="store_true")
    p_ver.set_defaults(func=_cmd_verify)

    p_gap = sub.add_parser("gapbench", help="certified-gap benchmark")
    p_gap.add_argument("--instances", type=int, default=50)
    p_gap.add_argument("--seed", type=int, default=0)
    p_gap.add_argument("--niter", type=int, default=5)
    p_gap.add_argument("--out")
    p_gap.set_defaults(func=_cmd_gapbench)

    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
