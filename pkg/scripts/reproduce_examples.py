"""Exact oracle quantities for RW1 (conditioned and not) at several horizons."""

from fkppg.bench import build_rw1
from fkppg.oracle import (
    enumerate_paths,
    expectation_t,
    filtering_distribution,
    lifted_weight,
    semantics_bounds,
    shortcut_value,
    terminated_weight,
    weight,
)


def main():
    for conditioned in (True, False):
        bm = build_rw1(conditioned)
        g = bm.ppg()
        q = bm.lifted_query(g)
        print(f"== {bm.name}")
        for t in (4, 5, 6, 8, 16):
            table = enumerate_paths(g, t)
            rep = semantics_bounds(table, q)
            print(
                f"t={t:<3d} E[f*w]={expectation_t(table, lifted_weight(q, g.nil)):.6f} "
                f"E[w]={expectation_t(table, weight):.6f} "
                f"E[1{{T<=t}}*w]={expectation_t(table, terminated_weight(g.nil)):.6f} "
                f"alpha={rep.alpha:.6f} beta=[{rep.beta_lower:.6f}, {rep.beta_upper:.6f}] "
                f"shortcut={shortcut_value(table, q):.6f}"
            )
        for s, m in sorted(filtering_distribution(enumerate_paths(g, 4)).items(),
                           key=lambda kv: kv[0].store):
            print(f"  filtering t=4: store={s.store} node={s.checkpoint} mass={m:.6f}")


if __name__ == "__main__":
    main()
