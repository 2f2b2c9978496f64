//! Acceptance criteria, one PASS/FAIL line each. Exits non-zero if any fail.

#![allow(clippy::needless_range_loop)]

mod common;

use std::process::{Command, ExitCode};

use circq::classify::{
    classify, identity_suite, point_tensors, residual_fs, residual_w0, residual_w1, residual_w2, residual_w3,
    ClassifyOptions, Identity, Residuals, Verdict,
};
use circq::geometry::{curvature_symmetries, metricity_residual};
use circq::{canonical_p, canonical_q, frame_at, ManifoldSpec, Mat4};
use common::*;

const N: usize = 100;
const TOL: f64 = 1e-8;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn opts(n: usize) -> ClassifyOptions {
    ClassifyOptions { n_points: n, seed: 0, tol: TOL, check_identities: true, threads: None }
}

fn canonical_structure() -> Outcome {
    let q = canonical_q();
    let p = canonical_p();
    let neg = Mat4::from_fn(|i, j| if i == j { -1.0 } else { 0.0 });
    let quartic = q.powi(4) == Mat4::identity();
    let not_pm = (p - Mat4::identity()).max_abs() > 0.5 && (p - neg).max_abs() > 0.5;
    check(
        quartic && not_pm && p.trace() == 0.0,
        format!("Q^4 = I: {quartic}, Q^2 != +-I: {not_pm}, tr Q^2 = {}", p.trace()),
    )
}

fn flat_is_w0() -> Outcome {
    let spec = load("flat");
    let mut worst: f64 = 0.0;
    for p in random_points(&spec, N, 11) {
        let t = point_tensors(&spec, &p).map_err(|e| e.to_string())?;
        let fr = &t.frame;
        for v in [
            fr.gamma.max_abs(),
            fr.nabla_q.max_abs(),
            fr.nabla_p.max_abs(),
            t.f.max_abs(),
            t.fbar.max_abs(),
            fr.r.max_abs(),
            residual_w0(&t),
            residual_w1(&t),
            residual_w2(&t),
            residual_w3(&t),
            residual_fs(&t),
        ] {
            worst = worst.max(v);
        }
    }
    let report = classify(&spec, &opts(N)).map_err(|e| e.to_string())?;
    let text = circq::cli::render_text(&circq::cli::RunReport {
        tool: "circq".into(),
        version: String::new(),
        timestamp: 0,
        label: "flat".into(),
        mode: circq::cli::Mode::Circulant,
        check_identities: true,
        classification: report,
    });
    let holds = text.contains("W0: holds");
    check(worst <= 1e-12 && holds, format!("max tensor/residual {worst:.2e}, report says W0 holds: {holds}"))
}

fn universal_identities() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["curved_a", "curved_b", "curved_c", "twisted"] {
        let spec = load(name);
        let mut worst: f64 = 0.0;
        for p in random_points(&spec, N, 12) {
            let ids = identity_suite(&point_tensors(&spec, &p).map_err(|e| e.to_string())?);
            worst = worst.max(ids.max_universal());
        }
        ok &= worst <= TOL;
        parts.push(format!("{name} {worst:.2e}"));
    }
    check(ok, format!("max f14..f21 residual: {}", parts.join(", ")))
}

fn w0_fs_equivalence() -> Outcome {
    let mut both_fail = Vec::new();
    let mut both_hold = Vec::new();
    let mut mismatches = 0;
    for (name, spec) in corpus() {
        let mut any_fail = false;
        let mut any_hold = false;
        for p in random_points(&spec, N, 13) {
            let t = point_tensors(&spec, &p).map_err(|e| e.to_string())?;
            let (w0, fs) = (residual_w0(&t) <= TOL, residual_fs(&t) <= TOL);
            mismatches += (w0 != fs) as usize;
            any_fail |= !w0 && !fs;
            any_hold |= w0 && fs;
        }
        if any_fail {
            both_fail.push(name);
        }
        if any_hold {
            both_hold.push(name);
        }
    }
    check(
        mismatches == 0 && !both_fail.is_empty(),
        format!(
            "{mismatches} mismatches; both hold on [{}], both fail on [{}]",
            both_hold.join(" "),
            both_fail.join(" ")
        ),
    )
}

fn cross_formulation() -> Outcome {
    let mut worst: f64 = 0.0;
    for (_, spec) in corpus() {
        for p in random_points(&spec, N, 14) {
            let r = Residuals::evaluate(&point_tensors(&spec, &p).map_err(|e| e.to_string())?);
            worst = worst.max(r.formulation_gap());
        }
    }
    check(worst <= TOL, format!("max |W_k - W_k bar| over corpus: {worst:.2e}"))
}

fn curvature_proposition() -> Outcome {
    let flat = load("flat");
    let mut q_inv: f64 = 0.0;
    for p in random_points(&flat, N, 15) {
        let ids = identity_suite(&point_tensors(&flat, &p).map_err(|e| e.to_string())?);
        let q = ids.get(Identity::CurvatureQInvariant).ok_or("Q-invariance not evaluated")?;
        let pp = ids.get(Identity::CurvaturePInvariant).ok_or("P-invariance not evaluated")?;
        q_inv = q_inv.max(q).max(pp);
    }
    let mut metricity: f64 = 0.0;
    let mut sym: f64 = 0.0;
    for name in ["curved_a", "curved_c"] {
        let spec = load(name);
        for p in random_points(&spec, N, 16) {
            let fr = frame_at(&spec, &p).map_err(|e| e.to_string())?;
            metricity = metricity.max(metricity_residual(&fr));
            sym = sym.max(curvature_symmetries(&fr).max());
        }
    }
    check(
        q_inv == 0.0 && metricity <= 1e-9 && sym <= 1e-8,
        format!("flat R(x,y,Qz,Qu), R(x,y,Pz,Pu): {q_inv:.2e}; curved nabla g {metricity:.2e}, symmetries+Bianchi {sym:.2e}"),
    )
}

fn oracle_agreement() -> Outcome {
    let mut fd: f64 = 0.0;
    let mut brute: f64 = 0.0;
    for (_, spec) in corpus() {
        for p in random_points(&spec, N, 17) {
            let t = point_tensors(&spec, &p).map_err(|e| e.to_string())?;
            let fr = frame_at(&spec, &p).map_err(|e| e.to_string())?;
            for k in 0..4 {
                let d = fd_mat(spec.metric(), &p.0, k);
                for i in 0..4 {
                    for j in 0..4 {
                        fd = fd.max(rel_err(fr.dg[k][i][j], d[i][j]));
                        let dk = spec.metric()[i][j].differentiate(circq::Coord::ALL[k]);
                        for m in 0..4 {
                            let sym =
                                dk.differentiate(circq::Coord::ALL[m]).evaluate(&p.0).map_err(|e| e.to_string())?;
                            fd = fd.max(rel_err(sym, fd_scalar(&dk, &p.0, m)));
                        }
                    }
                }
            }
            let o = Oracle::at(&spec, &p.0);
            let of = o.f_array();
            for i in 0..4 {
                for j in 0..4 {
                    for k in 0..4 {
                        fd = fd.max(rel_err(fr.gamma.get(i, j, k), o.gamma[i][j][k]));
                        fd = fd.max(rel_err(t.f.get(i, j, k), of[i][j][k]));
                    }
                }
            }
            let data = ClassData {
                f: &t.f.0,
                g: &t.frame.g.0,
                ginv: &t.frame.ginv.0,
                p: &t.frame.p.0,
                nabla_p_max: t.frame.nabla_p.max_abs(),
            };
            brute = brute
                .max((residual_w1(&t) - data.w1()).abs())
                .max((residual_w2(&t) - data.w2()).abs())
                .max((residual_w3(&t) - data.w3()).abs());
        }
    }
    check(
        fd <= 1e-6 && brute <= 1e-12,
        format!("symbolic vs finite differences {fd:.2e} (rel), class residuals vs brute-force loops {brute:.2e}"),
    )
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_circq");
    let mut outputs = Vec::new();
    for name in ["curved_b", "twisted"] {
        for threads in ["1", "2", "7", "7"] {
            let o = Command::new(bin)
                .args([spec_path(name).to_str().unwrap(), "--points", "40", "--seed", "3", "--format", "machine"])
                .args(["--threads", threads])
                .output()
                .map_err(|e| e.to_string())?;
            if !o.status.success() {
                return Err(format!("{name}: exit {:?}", o.status.code()));
            }
            outputs.push((name, strip_timestamp(&String::from_utf8_lossy(&o.stdout))));
        }
    }
    let identical = outputs.chunks(4).all(|c| c.iter().all(|(_, s)| *s == c[0].1));
    check(identical, format!("machine reports byte-identical over 4 runs x 2 specs at 1/2/7 threads: {identical}"))
}

fn scale_invariance() -> Outcome {
    let mut changed = Vec::new();
    for (name, spec) in corpus() {
        let scaled: ManifoldSpec = spec.with_scaled_metric(7.0);
        let a = classify(&spec, &opts(N)).map_err(|e| e.to_string())?;
        let b = classify(&scaled, &opts(N)).map_err(|e| e.to_string())?;
        if a.verdicts != b.verdicts {
            changed.push(name);
        }
    }
    check(changed.is_empty(), format!("specs whose verdicts changed under g -> 7g: [{}]", changed.join(" ")))
}

fn conformal_w1() -> Outcome {
    let spec = load("conformal");
    let mut oracle: f64 = 0.0;
    for p in random_points(&spec, N, 18) {
        let o = Oracle::at(&spec, &p.0);
        let f = o.f_array();
        let data = ClassData { f: &f, g: &o.g, ginv: &o.ginv, p: &o.p, nabla_p_max: o.nabla_p_max() };
        oracle = oracle.max(data.w1());
    }
    let report = classify(&spec, &opts(N)).map_err(|e| e.to_string())?;
    let v = report.verdicts;
    let pinned = v.w0 == Verdict::Fails && v.w1 == Verdict::Holds && v.w2 == Verdict::Fails && v.w3 == Verdict::Fails;
    check(
        pinned && oracle <= 1e-7,
        format!(
            "engine W1 {} (max {:.2e}), finite-difference oracle max {oracle:.2e}; pinned W0 fails, W1 holds, W2 fails, W3 fails",
            v.w1, report.max.w1
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("canonical structure", canonical_structure),
        ("flat spec is W0", flat_is_w0),
        ("universal identity suite", universal_identities),
        ("W0 <=> fs equivalence", w0_fs_equivalence),
        ("F / F-bar cross-formulation agreement", cross_formulation),
        ("curvature invariance and connection invariants", curvature_proposition),
        ("oracle agreement", oracle_agreement),
        ("determinism", determinism),
        ("scale invariance", scale_invariance),
        ("conformal W1 candidate", conformal_w1),
    ];
    let mut failed = 0;
    for (n, (title, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {:>2} {tag}  {title}: {detail}", n + 1);
        failed += outcome.is_err() as usize;
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
