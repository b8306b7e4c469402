"""Smoke test for the `amr` extension module.

Build and install first:  maturin develop -m crates/python/Cargo.toml
"""

import json
from pathlib import Path

import amr

ROOT = Path(__file__).resolve().parent.parent


def main() -> None:
    tree = amr.MerkleTree(3, "poseidon")
    empty = tree.root()
    leaf = amr.commitment(b"\x01" * 32, b"\x02" * 32, "poseidon")
    root = tree.update(5, leaf)
    assert root != empty
    assert tree.verify(5, leaf, tree.prove(5), root)
    assert not tree.verify(4, leaf, tree.prove(5), root)

    assert amr.hash2(empty, empty, "mimc") != amr.hash2(empty, empty, "poseidon")
    assert amr.format_units(amr.parse_units("12.5")) == "12.5"

    market = amr.LendingMarket("1.001")
    shares = market.deposit(amr.parse_units("10"))
    market.accrue(10)
    assert market.value_of(shares) > amr.parse_units("10")

    assert amr.constraints("poseidon", 10) == 4245
    assert amr.gas_estimate("mimc", 20) == (1063000, 320000, 1383000)

    code, summary, log = amr.run_scenario_toml((ROOT / "crates" / "core" / "scenarios" / "basic_mix.toml").read_text())
    data = json.loads(summary)
    assert code == 0 and data["passed"]
    assert all(json.loads(line) for line in log.splitlines())

    trace = (ROOT / "crates" / "core" / "traces" / "uniform_100.trace").read_text()
    rows = [json.loads(line) for line in amr.analyze_trace(trace, [5000]).splitlines()]
    assert rows

    print("ok")


if __name__ == "__main__":
    main()
