"""Smoke test for the sposet extension module.

Build and install first, for example:
    maturin build --release -m crates/python/Cargo.toml -o dist && pip install dist/sposet-*.whl
"""

import random

import sposet


def reach(n, edges):
    adj = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
    out = []
    for a in range(n):
        seen = {a}
        stack = [a]
        while stack:
            x = stack.pop()
            for y in adj[x]:
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        out.append(seen)
    return out


def main():
    chain = sposet.Oracle(3, [(0, 1), (1, 2)])
    assert chain.mode == "poset" and len(chain) == 3
    assert chain.query(0, 2) and not chain.query(2, 0) and chain.query(1, 1)

    n, edges, kind = sposet.generate("random_digraph", 60, p=0.05, seed=4)
    assert kind == "digraph"
    o = sposet.Oracle(n, edges, mode="digraph")
    truth = reach(n, edges)
    pairs = [(a, b) for a in range(n) for b in range(n)]
    assert o.query_many(pairs) == [b in truth[a] for a, b in pairs]

    n, edges, kind = sposet.generate("random_layered", 300, seed=1)
    p = sposet.Oracle(n, edges, edges_kind=kind)
    data = p.to_bytes()
    q = sposet.Oracle.from_bytes(data)
    rng = random.Random(0)
    sample = [(rng.randrange(n), rng.randrange(n)) for _ in range(5000)]
    assert p.query_many(sample) == q.query_many(sample)
    assert q.to_bytes() == data
    ans, ops = p.query_counted(0, n - 1)
    assert ops <= 32
    report = p.space_report()
    assert report["n"] == n and report["total_bits"] > 0

    text = sposet.Oracle.from_text("3 2\n1 2\n2 3\n", "cover")
    assert text.query(0, 2)

    for bad, exc in [
        (lambda: chain.query(0, 3), IndexError),
        (lambda: sposet.Oracle(2, [(0, 1), (1, 0)]), ValueError),
        (lambda: sposet.Oracle(3, [(0, 1), (1, 2)], mode="relation"), ValueError),
        (lambda: sposet.Oracle.from_bytes(data[:-1]), sposet.CorruptError),
        (lambda: sposet.Oracle(2, [], mode="nope"), ValueError),
    ]:
        try:
            bad()
        except exc:
            pass
        else:
            raise AssertionError(f"expected {exc.__name__}")

    print(f"smoke test ok: {o!r}, {p!r}, {report['quarter_ratio']:.3f} x n^2/4")


if __name__ == "__main__":
    main()
