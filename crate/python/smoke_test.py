"""Smoke test for the rstboost_py extension module.

Build and run from the repository root:

    cargo build --release -p rstboost-py --features extension-module
    cp target/release/librstboost_py.so python/rstboost_py.so
    python3 python/smoke_test.py
"""

import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import rstboost_py as rb  # noqa: E402


def main() -> None:
    assert rb.truncate_center(["t1", "t2", "t3", "t4"], 2) == ["t1", "t4"]

    tree = '(NS elaboration (leaf "the cat sat") (leaf "on the mat"))'
    assert rb.oracle(tree) == ["SHIFT", "SHIFT", "REDUCE NS elaboration"]
    assert rb.validate(tree) == []
    assert rb.score(tree, tree)["rel_f1"] == 1.0

    train = rb.synthesize("a", n_docs=60, seed=1)
    test_a = rb.synthesize("a", n_docs=20, seed=2)
    test_b = rb.synthesize("b", n_docs=20, seed=3)
    assert len(train) == 60 and train.domain_tag == "a"
    assert rb.Treebank.from_text(train.to_text()).documents() == train.documents()

    model, seconds = rb.Model.train(train, n_steps=2, hidden_dim=4, hash_dim=128, epochs_max=5)
    assert model.n_steps == 2 and len(seconds) == 2
    bracketed, trace = model.parse(["first unit here", "because of that", "then more"], prefix=1)
    assert len(trace) == 5 and rb.validate(bracketed) == []

    scores = model.evaluate(test_a)
    assert 0.0 <= scores["span_f1"] <= 1.0
    csv = model.curve([test_a, test_b])
    assert len(csv.strip().splitlines()) == 1 + 2 * 2

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "model.json")
        model.save(path)
        assert rb.Model.load(path).to_json() == model.to_json()

    try:
        model.parse(["x"], prefix=0)
    except ValueError:
        pass
    else:
        raise AssertionError("prefix 0 must be rejected")

    print("python smoke test: ok", f"(span F1 {scores['span_f1']:.3f})")


if __name__ == "__main__":
    main()
