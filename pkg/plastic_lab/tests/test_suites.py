import unittest
from unittest import mock

from plastic_lab.app.core.config import settings
from plastic_lab.app.core.errors import InvalidParameterError, UnknownSuiteError
from plastic_lab.app.services.suites import SUITES, SuiteRunner, run_suite, suite_runner

SUITE_IDS = [
    "m20-form",
    "m30-canonical",
    "inverse-remark",
    "metallic-remark",
    "m10-cubic",
    "pairing-symmetry",
    "hat-check-coincide",
    "m10-parallel-iff",
    "m15-cubic",
    "duality",
    "m15-parallel-iff",
    "diag-integrability",
    "j1-eq-j2-remark",
    "m45-sufficiency",
    "m45-formula-crosscheck",
]


class TestCatalogue(unittest.TestCase):
    def test_known_suites(self):
        self.assertEqual(suite_runner.known(), SUITE_IDS)
        self.assertEqual(len(SUITES), 15)

    def test_singleton(self):
        self.assertIs(SuiteRunner(), suite_runner)

    def test_unknown_suite(self):
        with self.assertRaises(UnknownSuiteError) as ctx:
            run_suite("m99-nothing")
        self.assertIn("m20-form", str(ctx.exception))

    def test_invalid_parameters(self):
        for kwargs in ({"trials": 0}, {"seed": -1}, {"dim": 5}, {"dim": 1}):
            with self.subTest(**kwargs):
                with self.assertRaises(InvalidParameterError):
                    run_suite("m20-form", **kwargs)


class TestSuitesPass(unittest.TestCase):
    """每个实例族跑一次"""

    def test_every_suite_passes(self):
        for suite in SUITE_IDS:
            with self.subTest(suite=suite):
                report = run_suite(suite, trials=1, seed=0, dim=2)
                self.assertEqual(report.verdict, "pass", report.failures)
                self.assertEqual(report.trials, len(suite_runner.get(suite).families))

    def test_second_seed(self):
        for suite in ("m20-form", "m30-canonical", "m10-parallel-iff", "diag-integrability"):
            with self.subTest(suite=suite):
                self.assertEqual(run_suite(suite, trials=6, seed=11, dim=2).verdict, "pass")

    def test_dimension_three(self):
        for suite in ("inverse-remark", "m10-cubic", "m15-cubic"):
            with self.subTest(suite=suite):
                self.assertEqual(run_suite(suite, trials=1, seed=2, dim=3).verdict, "pass")


class TestReports(unittest.TestCase):
    def test_deterministic(self):
        a = run_suite("m10-parallel-iff", trials=4, seed=3)
        b = run_suite("m10-parallel-iff", trials=4, seed=3)
        self.assertEqual(a.stable_dump(), b.stable_dump())

    def test_workers_do_not_change_report(self):
        serial = run_suite("hat-check-coincide", trials=4, seed=5)
        with mock.patch.object(settings, "SUITE_WORKERS", 2):
            parallel = run_suite("hat-check-coincide", trials=4, seed=5)
        self.assertEqual(serial.stable_dump(), parallel.stable_dump())

    def test_witnesses_and_truth_table(self):
        report = run_suite("hat-check-coincide", trials=1, seed=0)
        self.assertGreaterEqual(report.witnesses["coincide"], 1)
        self.assertGreaterEqual(report.witnesses["differ"], 1)
        self.assertEqual(len(report.truth_table), report.trials)
        for row in report.truth_table:
            self.assertEqual(row["coincide"], row["metric_parallel"])

        report = run_suite("m45-sufficiency", trials=1, seed=0)
        self.assertEqual(report.verdict, "pass", report.failures)
        self.assertGreaterEqual(report.witnesses["torsion"], 3)
        self.assertGreaterEqual(report.witnesses["non-scalar-torsion"], 1)
        block_rows = [row for row in report.truth_table if row["family"] == "block-torsion"]
        self.assertTrue(block_rows and all(row["torsion"] and row["nabla_integrable"] for row in block_rows))

    def test_torsion_minimum_enforced(self):
        definition = suite_runner.get("m45-sufficiency")
        # 只保留一个带挠率的族：单次 trial 达不到 3 个挠率实例
        narrowed = definition.__class__(
            id="m45-narrow",
            statement=definition.statement,
            trial=definition.trial,
            families=definition.families[:1],
            required_witnesses=("torsion",),
            witness_minimums=definition.witness_minimums,
        )
        with mock.patch.dict(suite_runner.registry, {narrowed.id: narrowed}):
            report = run_suite(narrowed.id, trials=1, seed=0)
        self.assertEqual(report.verdict, "fail")
        self.assertEqual([f.trial for f in report.failures], [-1])
        self.assertIn("1 of the required 3", report.failures[0].reason)

    def test_torsion_free_remark_uses_derived_order(self):
        report = run_suite("j1-eq-j2-remark", trials=6, seed=1)
        self.assertEqual(report.verdict, "pass", report.failures)
        for row in report.truth_table:
            self.assertEqual(row["nabla_integrable"], row["N_J_zero"] and row["condition"])

    def test_formula_discrepancy_reported(self):
        report = run_suite("m45-formula-crosscheck", trials=1, seed=0)
        self.assertEqual(report.verdict, "pass")
        self.assertIsNotNone(report.discrepancy)
        self.assertGreaterEqual(report.discrepancy["printed_mismatch_instances"], 1)

    def test_float_crosscheck(self):
        report = run_suite("m10-cubic", trials=1, seed=0, float_check=True)
        self.assertIsNotNone(report.float_max)
        self.assertLess(report.float_max, 1e-9)
        self.assertIsNone(run_suite("m10-cubic", trials=1, seed=0).float_max)

    def test_missing_witness_fails(self):
        definition = suite_runner.get("hat-check-coincide")
        # 只保留 Levi-Civita 族：永远见不到 "differ"
        narrowed = definition.__class__(
            id="hat-check-narrow",
            statement=definition.statement,
            trial=definition.trial,
            families=definition.families[:1],
            required_witnesses=definition.required_witnesses,
        )
        with mock.patch.dict(suite_runner.registry, {narrowed.id: narrowed}):
            report = run_suite(narrowed.id, trials=1, seed=0)
        self.assertEqual(report.verdict, "fail")
        self.assertEqual([f.trial for f in report.failures], [-1])
        self.assertIn("differ", report.failures[0].reason)

    def test_trial_exception_is_failure(self):
        definition = suite_runner.get("m20-form")
        broken = definition.__class__(id="broken", statement="", trial=mock.Mock(side_effect=RuntimeError("boom")))
        with mock.patch.dict(suite_runner.registry, {"broken": broken}):
            report = run_suite("broken", trials=2, seed=0)
        self.assertEqual(report.verdict, "fail")
        self.assertEqual(len(report.failures), 2)
        self.assertEqual(report.failures[0].reason, "RuntimeError: boom")

    def test_run_all(self):
        with mock.patch.object(suite_runner, "known", return_value=["m20-form", "metallic-remark"]):
            report = suite_runner.run_all(trials=2, seed=0)
        self.assertEqual(report.verdict, "pass")
        self.assertEqual([r.suite for r in report.reports], ["m20-form", "metallic-remark"])
        self.assertNotIn("ms", report.stable_dump()["reports"][0])


if __name__ == "__main__":
    unittest.main()
