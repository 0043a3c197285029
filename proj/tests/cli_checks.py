#!/usr/bin/env python3
"""Black-box checks of the command line tool.

Usage: cli_checks.py <path-to-binary>

Prints one [PASS]/[FAIL] line per check; exits with the failure count.
"""
import json
import os
import pathlib
import subprocess
import sys
import tempfile

BIN = os.path.abspath(sys.argv[1])
failures = 0


def run(args, env=None):
    merged = dict(os.environ)
    merged.pop("ACCELDSE_CONFIG", None)
    if env:
        merged.update(env)
    return subprocess.run([BIN] + args, capture_output=True, text=True,
                          env=merged)


def check(name, ok, detail=""):
    global failures
    if ok:
        print(f"[PASS] {name}")
    else:
        failures += 1
        suffix = f" ({detail})" if detail else ""
        print(f"[FAIL] {name}{suffix}")


def read(path):
    return pathlib.Path(path).read_bytes()


with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)

    # ---- simulate writes a row per layer and parseable JSON ------------
    out1 = tmp / "sim"
    r = run(["simulate", "--builtin", "vgg16", "--out", str(out1)])
    csv_path = out1 / "vgg16_layers.csv"
    json_path = out1 / "vgg16_layers.json"
    ok = r.returncode == 0 and csv_path.exists() and json_path.exists()
    detail = f"rc={r.returncode} {r.stderr.strip()}"
    if ok:
        lines = csv_path.read_text().splitlines()
        ok = (lines[0].startswith("#") and lines[1].startswith("layer,") and
              len(lines) == 2 + 21)
        detail = f"{len(lines)} csv lines"
    if ok:
        doc = json.loads(json_path.read_text())
        ok = (len(doc["layers"]) == 21 and doc["energy_total"] > 0 and
              doc["latency_total"] > 0 and doc["network"] == "vgg16")
        detail = "json contents"
    if ok:
        ok = "21 layers" in r.stdout
        detail = "stdout summary"
    check("simulate reports every layer", ok, detail)

    # ---- malformed inputs exit with the parse-error code ----------------
    r = run(["simulate", "--builtin", "vgg16", "--array", "16"])
    check("bad array geometry exits 1", r.returncode == 1, f"rc={r.returncode}")

    bad_net = tmp / "broken.json"
    bad_net.write_text("{not json")
    r = run(["simulate", "--network", str(bad_net)])
    check("malformed network file exits 1", r.returncode == 1,
          f"rc={r.returncode}")

    r = run(["simulate", "--builtin", "vgg16", "--no-such-flag"])
    check("unknown flag exits 1", r.returncode == 1, f"rc={r.returncode}")

    # ---- validation failures exit 2 -------------------------------------
    r = run(["simulate", "--builtin", "nosuchnet"])
    check("unknown builtin exits 2", r.returncode == 2, f"rc={r.returncode}")

    bad_cfg = tmp / "bad_config.json"
    bad_cfg.write_text('{"array": [0, 4]}')
    r = run(["simulate", "--builtin", "alexnet", "--config", str(bad_cfg)])
    check("invalid config exits 2", r.returncode == 2, f"rc={r.returncode}")

    # ---- simulation failures exit 3 --------------------------------------
    wide_net = tmp / "wide.json"
    wide_net.write_text(json.dumps({
        "name": "wide",
        "input": {"c": 1, "h": 8, "w": 2000},
        "conv_part": [{"kind": "input"},
                      {"kind": "conv", "name": "c1", "m": 1, "k": 3}],
        "fc_part": [],
    }))
    r = run(["simulate", "--network", str(wide_net)])
    check("register-file overflow exits 3",
          r.returncode == 3 and "c1" in r.stderr,
          f"rc={r.returncode} {r.stderr.strip()}")

    # ---- the config environment variable mirrors --config ----------------
    cfg_file = tmp / "cfg.json"
    cfg_file.write_text('{"array": [16, 16]}')
    out_flag = tmp / "by_flag"
    out_env = tmp / "by_env"
    r1 = run(["simulate", "--builtin", "alexnet", "--config", str(cfg_file),
              "--out", str(out_flag)])
    r2 = run(["simulate", "--builtin", "alexnet", "--out", str(out_env)],
             env={"ACCELDSE_CONFIG": str(cfg_file)})
    ok = (r1.returncode == 0 and r2.returncode == 0 and
          read(out_flag / "alexnet_layers.json") ==
          read(out_env / "alexnet_layers.json"))
    check("config via environment equals --config", ok,
          f"rc={r1.returncode}/{r2.returncode}")

    # ---- sweeps are byte-identical for any job count ---------------------
    sweep_args = ["sweep", "--builtin", "alexnet",
                  "--gb-psum-sizes", "13,54", "--gb-ifmap-sizes", "13,54",
                  "--arrays", "16x16,32x32", "--plot-ifmap", "54"]
    out_s1 = tmp / "sweep1"
    out_s4 = tmp / "sweep4"
    r1 = run(sweep_args + ["--jobs", "1", "--out", str(out_s1)])
    r4 = run(sweep_args + ["--jobs", "4", "--out", str(out_s4)])
    ok = r1.returncode == 0 and r4.returncode == 0
    detail = f"rc={r1.returncode}/{r4.returncode} {r1.stderr.strip()}"
    if ok:
        for name in ["alexnet_sweep.csv", "alexnet_metrics.json",
                     "alexnet_plotdata.csv"]:
            if read(out_s1 / name) != read(out_s4 / name):
                ok, detail = False, f"{name} differs"
                break
    check("sweep outputs are independent of --jobs", ok, detail)

    # ---- partition balances a latency file and verifies ------------------
    lat_file = tmp / "lat.txt"
    lat_file.write_text("# five pipeline stages\n5\n3\n8\n6\n2\n")
    out_p = tmp / "part"
    r = run(["partition", "--latencies-file", str(lat_file), "--cores", "3",
             "--verify", "--out", str(out_p)])
    ok = r.returncode == 0 and "verified" in r.stdout
    detail = f"rc={r.returncode} {r.stderr.strip()}"
    if ok:
        doc = json.loads((out_p / "lat_plan.json").read_text())
        stages = [(c["l_initial"], c["n_c"]) for c in doc["cores"]]
        ok = (stages == [(1, 2), (3, 1), (4, 2)] and
              doc["max_latency"] == 8 and doc["speedup"] == 3)
        detail = f"stages={stages}"
    check("partition finds the balanced pipeline", ok, detail)

    # ---- recommend accepts fresh sweeps and saved sweep files ------------
    out_r1 = tmp / "rec1"
    r1 = run(["recommend", "--builtin", "alexnet", "--builtin", "mobilenet",
              "--out", str(out_r1)])
    ok = r1.returncode == 0
    detail = f"rc={r1.returncode} {r1.stderr.strip()}"
    if ok:
        out_r2 = tmp / "rec2"
        r2 = run(["recommend",
                  "--sweep-file", str(out_r1 / "alexnet_sweep.csv"),
                  "--sweep-file", str(out_r1 / "mobilenet_sweep.csv"),
                  "--out", str(out_r2)])
        ok = r2.returncode == 0
        detail = f"rc={r2.returncode} {r2.stderr.strip()}"
        if ok:
            d1 = json.loads((out_r1 / "recommendation.json").read_text())
            d2 = json.loads((out_r2 / "recommendation.json").read_text())
            ok = (d1["cores"] == d2["cores"] and
                  d1["coverage"] == d2["coverage"])
            detail = "recommendations differ"
    check("recommend reuses saved sweep files", ok, detail)

    if ok:
        out_r3 = tmp / "rec3"
        r3 = run(["recommend", "--builtin", "alexnet", "--builtin",
                  "mobilenet", "--out", str(out_r3)])
        ok = (r3.returncode == 0 and
              read(out_r1 / "recommendation.json") ==
              read(out_r3 / "recommendation.json"))
        check("recommend reruns are byte-identical", ok, f"rc={r3.returncode}")
    else:
        check("recommend reruns are byte-identical", False, "skipped")

sys.exit(failures)
