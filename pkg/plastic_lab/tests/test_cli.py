import io
import json
import os
import shutil
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

from plastic_lab.app.cli.router import CommandRouter
from plastic_lab.app.main import cli_router, main


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main(["--log-level", "ERROR", *argv])
    return code, out.getvalue(), err.getvalue()


class TestCLI(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def scenario(self, data) -> str:
        path = os.path.join(self.tmpdir, "scenario.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f)
        return path

    def test_commands_registered(self):
        self.assertEqual(sorted(cli_router.commands), ["check", "classify", "suite"])
        with self.assertRaises(ValueError):
            cli_router.include_router(cli_router)

    def test_check_pass_and_fail(self):
        path = self.scenario({"chart": {"dim": 2}, "tensors": {"J": [["rho", 0], [0, "rho"]]}, "checks": ["plastic"]})
        code, out, _ = run_cli("check", path)
        self.assertEqual(code, 0)
        self.assertEqual(json.loads(out)["verdict"], "pass")

        path = self.scenario({"chart": {"dim": 2}, "tensors": {"J": [[1, 0], [0, 1]]}, "checks": ["plastic"]})
        code, out, _ = run_cli("check", path)
        self.assertEqual(code, 1)
        self.assertEqual(json.loads(out)["results"][0]["residual"], [["-1", "0"], ["0", "-1"]])

    def test_input_errors_exit_two(self):
        code, out, err = run_cli("check", os.path.join(self.tmpdir, "absent.json"))
        self.assertEqual(code, 2)
        self.assertEqual(out, "")
        self.assertTrue(err.startswith("error: "))

        path = self.scenario({"chart": {"dim": 2}, "tensors": {"J": [["rho", "x1 +"], [0, 1]]}, "checks": ["plastic"]})
        code, _, err = run_cli("check", path)
        self.assertEqual(code, 2)
        self.assertIn("tensors.J[0][1]", err)

        path = self.scenario({"chart": {"dim": 2, "coords": ["x", "x"]}, "tensors": {"J": [[1, 0], [0, 1]]}, "checks": ["plastic"]})
        code, out, err = run_cli("check", path)
        self.assertEqual(code, 2)
        self.assertEqual(out, "")
        self.assertIn("chart", err)

        path = self.scenario({"chart": {"dim": 2, "coords": ["x", "rho"]}, "tensors": {"J": [[1, 0], [0, 1]]}, "checks": ["plastic"]})
        code, _, err = run_cli("check", path)
        self.assertEqual(code, 2)
        self.assertIn("chart.coords", err)

        binary = os.path.join(self.tmpdir, "binary.json")
        with open(binary, "wb") as f:
            f.write(b"\xff\xfe{bad")
        code, _, err = run_cli("check", binary)
        self.assertEqual(code, 2)
        self.assertIn("UTF-8", err)

        path = self.scenario({"chart": {"dim": 1}, "tensors": {"J": [["x1^99999999"]]}, "checks": ["plastic"]})
        code, _, err = run_cli("check", path)
        self.assertEqual(code, 2)
        self.assertIn("tensors.J[0][0]", err)

        code, _, err = run_cli("suite", "m99-nothing")
        self.assertEqual(code, 2)
        self.assertIn("unknown suite", err)

        code, _, _ = run_cli("suite", "m20-form", "--trials", "0")
        self.assertEqual(code, 2)

    def test_argparse_errors(self):
        with self.assertRaises(SystemExit) as ctx:
            run_cli("suite", "m20-form", "--trials", "many")
        self.assertEqual(ctx.exception.code, 2)
        with self.assertRaises(SystemExit):
            run_cli()

    def test_suite_with_output(self):
        target = os.path.join(self.tmpdir, "report.json")
        code, out, _ = run_cli("suite", "m20-form", "--trials", "2", "--seed", "4", "--output", target)
        self.assertEqual(code, 0)
        report = json.loads(out)
        self.assertEqual(report["suite"], "m20-form")
        self.assertEqual(report["trials"], 2)
        self.assertEqual(report["seed"], 4)
        with open(target, encoding="utf-8") as f:
            self.assertEqual(json.load(f), report)

    def test_suite_float_crosscheck(self):
        code, out, _ = run_cli("suite", "inverse-remark", "--trials", "1", "--float-crosscheck")
        self.assertEqual(code, 0)
        self.assertLess(json.loads(out)["float_max"], 1e-9)

    def test_classify(self):
        code, out, _ = run_cli("classify", "0, 1-rho^2; 1, -rho")
        self.assertEqual(code, 0)
        data = json.loads(out)
        self.assertEqual(data["branch"], "conjugate")
        self.assertEqual(data["matrix"], [["0", "1 - rho^2"], ["1", "-rho"]])

        code, out, _ = run_cli("classify", "1, 0; 0, 1")
        self.assertEqual(code, 0)
        self.assertFalse(json.loads(out)["plastic"])

        code, _, _ = run_cli("classify", "1,2;3,x")
        self.assertEqual(code, 2)


class TestRouter(unittest.TestCase):
    def test_duplicate_names(self):
        a, b = CommandRouter(), CommandRouter()
        a.command("x", help="")(lambda args: 0)
        b.command("x", help="")(lambda args: 1)
        root = CommandRouter()
        root.include_router(a)
        with self.assertRaises(ValueError):
            root.include_router(b)


if __name__ == "__main__":
    unittest.main()
