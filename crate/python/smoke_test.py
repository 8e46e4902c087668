"""Smoke test for the qgame Python bindings.

Build and install first:
    pip install maturin
    maturin develop --release -m crates/python/Cargo.toml
then run:
    python python/smoke_test.py
"""

import json
import math

import qgame_py as qg


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol


def main():
    assert qg.catalog_names() == ["penny_flip", "prisoners_dilemma", "battle_of_sexes"]

    pd = qg.Game.catalog("prisoners_dilemma")
    assert pd.players == ["A", "B"]
    assert pd.pure_nash() == ["DD"]
    assert pd.classical_payoffs("CD") == [-5.0, 0.0]

    uq = [0.0, math.pi / 2]
    assert all(close(x, -1.0) for x in pd.payoffs([uq, uq], family="two_param"))
    rep = pd.verify_nash([uq, uq], family="two_param")
    assert rep["certified"] and not rep["refuted"], rep

    rep = pd.verify_nash([[0.0, math.pi / 2, 0.0]] * 2, family="three_param")
    assert rep["refuted"], rep

    point, value = pd.best_response(0, [uq, [math.pi, 0.0]], family="two_param")
    assert close(value, 0.0, 1e-6), (point, value)

    bos = qg.Game.catalog("battle_of_sexes")
    assert all(close(x, 2.5) for x in bos.payoffs(["I", "I"]))
    rep = bos.verify_nash([[0.5, 0.5], [0.5, 0.5]], mixed=True)
    assert rep["certified"] and all(close(x, 1.75) for x in rep["payoffs"]), rep

    penny = qg.Game.catalog("penny_flip")
    for reply in ("N", "F"):
        pay = penny.play_sequential(["UQstar", reply, "UQstar"])
        assert close(pay[0], 1.0) and close(pay[1], -1.0), pay

    again = qg.Game.from_json(pd.to_json())
    assert again.to_json() == pd.to_json()

    code, out, err = qg.run_cli(["demo", "battle_of_sexes", "--format", "json", "--seed", "1"])
    assert code == 0, err
    assert json.loads(out)["command"] == "demo"
    code, _, err = qg.run_cli(["demo", "no_such_game"])
    assert code == 2 and err.startswith("error:")

    try:
        qg.Game.catalog("prisoners_dilemma", {"alpha": 1.0})
    except ValueError:
        pass
    else:
        raise AssertionError("invalid parameters accepted")

    print("python smoke test passed")


if __name__ == "__main__":
    main()
