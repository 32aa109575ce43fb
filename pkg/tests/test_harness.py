import json
import subprocess
import sys

import pytest

from sealedbid.auction import NoWinner, Winner
from sealedbid.harness import (
    ScenarioError,
    builtin_scenario_path,
    load_scenario,
    parse_scenario,
    run_benchmark,
    run_scenario,
    verify_trace,
)
from sealedbid.harness.bench import OPERATIONS, _normalize
from sealedbid.harness.cli import main
from sealedbid.ledger import Kind

# frozen final-state digests of the built-in scenarios
GOLDEN_DIGESTS = {
    "honest": "cb70858470487e47c3938a886170c5ce453ef2db9fe3d2cfccc14981e9866000",
    "dropout": "cc0d664c905c0e4bb41a4c97dd9f846cc7df7c57620c7cf8436aa5c2d8b7b02c",
    "double_spend": "3d4fc1e987ea8817b7a3652ec44e77dd6f34d0f227b124a32f93ef4192132f3e",
    "no_show_worker": "a661deca077cfb3cb198fe653f61814fd633c71a207f0a7dbfd5a178be1d27be",
}

BASE = {
    "name": "t",
    "seed": 1,
    "ceremony": {"authorities": 3, "threshold": 2},
    "timeline": {"t_commit": 6, "t_reveal": 10},
    "worker": {"min_price": 1},
    "bidders": [{"name": "a", "balance": 10, "bid": 5}],
}


@pytest.fixture(scope="module")
def runs():
    return {name: run_scenario(load_scenario(builtin_scenario_path(name))) for name in GOLDEN_DIGESTS}


def with_changes(**changes):
    doc = json.loads(json.dumps(BASE))
    for path, value in changes.items():
        node = doc
        *head, last = path.split("__")
        for key in head:
            node = node[int(key)] if isinstance(node, list) else node[key]
        if isinstance(node, list):
            node[int(last)] = value
        else:
            node[last] = value
    return doc


class TestScenarioSchema:
    def test_minimal_document_parses(self):
        sc = parse_scenario(BASE)
        assert sc.bidders[0].commit_at == 5 and sc.bidders[0].reveal_at == 6

    @pytest.mark.parametrize(
        "changes, field",
        [
            ({"timeline__t_reveal": 3}, "timeline"),
            ({"ceremony__threshold": 5}, "ceremony"),
            ({"bidders__0__bid": -1}, "bidders[0].bid"),
            ({"bidders__0__colour": "red"}, "bidders[0]"),
            ({"worker__min_price": "cheap"}, "worker.min_price"),
            ({"bidders__0__reveal_at": 3}, "bidders[0].reveal_at"),
        ],
    )
    def test_errors_name_the_field(self, changes, field):
        with pytest.raises(ScenarioError) as exc:
            parse_scenario(with_changes(**changes))
        assert str(exc.value).startswith(field)

    def test_duplicate_bidder_names(self):
        doc = with_changes()
        doc["bidders"].append(dict(doc["bidders"][0]))
        with pytest.raises(ScenarioError, match="bidders"):
            parse_scenario(doc)

    def test_unknown_builtin(self):
        with pytest.raises(FileNotFoundError, match="honest"):
            builtin_scenario_path("nope")

    def test_load_reports_yaml_errors(self, tmp_path):
        p = tmp_path / "bad.yaml"
        p.write_text("name: [unterminated\n")
        with pytest.raises(ScenarioError):
            load_scenario(p)


class TestBuiltinScenarios:
    @pytest.mark.parametrize("name", sorted(GOLDEN_DIGESTS))
    def test_passes_and_matches_golden_digest(self, runs, name):
        r = runs[name]
        assert r.passed, r.summary()
        assert r.ledger.state.digest() == GOLDEN_DIGESTS[name]

    def test_deterministic(self, runs):
        again = run_scenario(load_scenario(builtin_scenario_path("honest")))
        assert again.trace_lines() == runs["honest"].trace_lines()

    def test_honest_outcome(self, runs):
        r = runs["honest"]
        assert isinstance(r.outcome, Winner) and r.winner_name() == "alice" and r.outcome.price == 3
        assert r.payouts() == {"alice": 2, "bob": 3, "carol": 2}
        assert (r.worker_balance, r.locked) == (3, 0)

    def test_dropout_locks_funds(self, runs):
        r = runs["dropout"]
        assert r.locked == 10
        assert ("dave", Kind.WITHDRAW, "UNKNOWN_ZETA") in r.rejections()

    def test_double_spend_rejected(self, runs):
        assert ("bob", Kind.WITHDRAW, "DOUBLE_SPEND") in runs["double_spend"].rejections()

    def test_no_show_worker_refunds(self, runs):
        r = runs["no_show_worker"]
        assert r.outcome == NoWinner() and r.locked == 0

    def test_unmet_expectation_fails_run(self):
        doc = with_changes()
        doc["expect"] = {"locked": 99}
        r = run_scenario(parse_scenario(doc))
        assert not r.passed and r.unmet

    @pytest.mark.parametrize("name", sorted(GOLDEN_DIGESTS))
    def test_trace_replays(self, runs, name):
        report = verify_trace(runs[name].trace_lines())
        assert report.ok, report.problems
        assert report.state_digest == GOLDEN_DIGESTS[name]


class TestTraceTampering:
    def lines(self, runs):
        return runs["honest"].trace_lines()

    def test_flipped_result(self, runs):
        lines = self.lines(runs)
        rec = json.loads(lines[3])
        rec["result"] = "rejected:DEADLINE"
        lines[3] = json.dumps(rec)
        report = verify_trace(lines)
        assert any("line 4" in p for p in report.problems)

    def test_wrong_final_digest(self, runs):
        lines = self.lines(runs)
        rec = json.loads(lines[-1])
        rec["state_digest"] = "00" * 32
        lines[-1] = json.dumps(rec)
        assert not verify_trace(lines).ok

    def test_dropped_transaction(self, runs):
        lines = self.lines(runs)
        del lines[5]
        assert not verify_trace(lines).ok

    def test_garbage(self):
        assert not verify_trace(["not json"]).ok
        assert not verify_trace([]).ok


class TestCli:
    def test_demo(self, capsys):
        assert main(["demo"]) == 0
        assert "alice wins" in capsys.readouterr().out

    def test_run_dropout_shows_locked_funds(self, capsys):
        assert main(["run", str(builtin_scenario_path("dropout"))]) == 0
        out = capsys.readouterr().out
        assert "locked) 10" in out and "dave Withdraw UNKNOWN_ZETA" in out

    def test_trace_round_trip(self, tmp_path, capsys):
        trace = tmp_path / "t.jsonl"
        assert main(["demo", "--trace", str(trace)]) == 0
        assert main(["verify-trace", str(trace)]) == 0
        lines = trace.read_text().splitlines()
        rec = json.loads(lines[2])
        rec["result"] = "applied" if rec["result"] != "applied" else "rejected:BAD_PROOF"
        lines[2] = json.dumps(rec)
        trace.write_text("\n".join(lines))
        assert main(["verify-trace", str(trace)]) == 1
        assert "violation: line 3" in capsys.readouterr().err

    def test_missing_files(self, tmp_path):
        assert main(["verify-trace", str(tmp_path / "none")]) == 2
        bad = tmp_path / "s.yaml"
        bad.write_text("name: x\n")
        assert main(["run", str(bad)]) == 2

    def test_bench_requires_100_iterations(self, capsys):
        assert main(["bench", "--iterations", "10"]) == 2
        assert "at least 100" in capsys.readouterr().err

    def test_bench_unknown_op(self):
        assert main(["bench", "--ops", "Bogus"]) == 2

    def test_console_script_entry(self):
        out = subprocess.run([sys.executable, "-m", "sealedbid.harness.cli", "--help"], capture_output=True, text=True)
        assert out.returncode == 0 and "verify-trace" in out.stdout


class TestBench:
    def test_ops_normalisation(self):
        assert _normalize(["submit-work", "create", "CREATE"]) == ["Create", "SubmitWork"]
        assert _normalize(None) == list(OPERATIONS)
        with pytest.raises(ValueError):
            _normalize(["mint"])

    def test_rejects_short_runs(self):
        with pytest.raises(ValueError):
            run_benchmark(iterations=99)

    def test_single_row_report(self):
        report = run_benchmark(["Create"], iterations=100)
        assert {(r.operation, r.side) for r in report.rows} == {("Create", "procedure"), ("Create", "checker")}
        assert report.row("Create", "checker").count == 100
        csv = report.to_csv().splitlines()
        assert csv[0].startswith("operation,side") and len(csv) == 3
