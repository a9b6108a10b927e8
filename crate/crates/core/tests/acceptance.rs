//! Acceptance criteria. Prints one line per criterion and exits nonzero on failure.

mod common;

use std::time::Instant;

use common::*;
use dcfunm::nalgebra::DMatrix;
use dcfunm::*;
use rand::Rng;

struct Outcome {
    pass: bool,
    warn_only: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome {
        pass,
        warn_only: false,
        detail,
    }
}

fn mono_poly(c: &[f64]) -> FunctionSpec {
    FunctionSpec::polynomial(c.to_vec())
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            c[i + j] += x * y;
        }
    }
    c
}

/// Relative Frobenius error of a banded approximation against a dense reference.
fn banded_rel_err(approx: &BandedMatrix, exact: &DMatrix<f64>, exact_norm: f64) -> f64 {
    let mut sq = 0.0;
    for i in 0..approx.n() {
        let band = approx.row_range(i);
        for j in 0..approx.n() {
            let e = exact[(i, j)];
            let d = if band.contains(&j) { approx.get(i, j) - e } else { -e };
            sq += d * d;
        }
    }
    sq.sqrt() / exact_norm
}

/// Least-squares geometric rate of `errs[k]` over the steps in `steps`.
fn fit_rate(steps: &[usize], errs: &[f64]) -> f64 {
    let n = steps.len() as f64;
    let xs: Vec<f64> = steps.iter().map(|&s| s as f64).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    (sxy / sxx).exp()
}

fn criterion_1() -> Outcome {
    let t0 = Instant::now();
    let mut worst = [0.0f64; 5];
    let mut r = rng(101);
    let n = 64;

    // (a) polynomial exactness
    for m in 1..=5 {
        for b in 1..=2 {
            for sym in [false, true] {
                let a = if sym {
                    random_symmetric_banded(n, b, &mut r)
                } else {
                    random_banded(n, b, b, &mut r)
                };
                let bf = random_dense(n, 2, &mut r);
                let cf = if sym { bf.clone() } else { random_dense(n, 2, &mut r) };
                let g = random_dense(2, 2, &mut r);
                let j = if sym { (&g + g.transpose()) * 0.5 } else { g };
                let c: Vec<f64> = (0..=m).map(|_| r.random_range(-1.0..1.0)).collect();
                let opts = KrylovOptions {
                    max_poles: m,
                    tol: 0.0,
                    ..Default::default()
                };
                let res = krylov_update(&a, &bf, &j, &cf, &PoleSequence::polynomial(), &mono_poly(&c), &opts).unwrap();
                let d = a.to_dense();
                let want = poly_powers(&c, &(&d + &bf * &j * cf.transpose())) - poly_powers(&c, &d);
                worst[0] = worst[0].max(rel(&res.to_dense(), &want));
            }
        }
    }

    // (b) rational exactness, two conjugate pole pairs
    let poles = PoleSequence::rational(vec![
        Pole::complex(2.0, 1.0),
        Pole::complex(2.0, -1.0),
        Pole::complex(-2.0, 1.5),
        Pole::complex(-2.0, -1.5),
    ])
    .unwrap();
    let q = poly_mul(&[5.0, -4.0, 1.0], &[6.25, 4.0, 1.0]);
    for sym in [false, true] {
        let mut a = if sym {
            random_symmetric_banded(n, 2, &mut r)
        } else {
            random_banded(n, 2, 2, &mut r)
        };
        a.scale(1.0 / a.norm1());
        let bf = random_dense(n, 2, &mut r) * 0.3;
        let cf = if sym { bf.clone() } else { random_dense(n, 2, &mut r) * 0.3 };
        let j = if sym { DMatrix::identity(2, 2) } else { random_dense(2, 2, &mut r) };
        let p: Vec<f64> = (0..=4).map(|_| r.random_range(-1.0..1.0)).collect();
        let f = FunctionSpec::rational(p.clone(), q.clone());
        let opts = KrylovOptions {
            max_poles: 4,
            tol: 0.0,
            ..Default::default()
        };
        let res = krylov_update(&a, &bf, &j, &cf, &poles, &f, &opts).unwrap();
        let d = a.to_dense();
        let oracle = |m: &DMatrix<f64>| poly_powers(&q, m).lu().solve(&poly_powers(&p, m)).unwrap();
        let want = oracle(&(&d + &bf * &j * cf.transpose())) - oracle(&d);
        worst[1] = worst[1].max(rel(&res.to_dense(), &want));
    }

    // (c) trace exactness for degree 2m
    for m in 1..=4 {
        for b in 1..=2 {
            let a = random_symmetric_banded(n, b, &mut r);
            let bf = random_dense(n, 2, &mut r);
            let g = random_dense(2, 2, &mut r);
            let j = (&g + g.transpose()) * 0.5;
            let c: Vec<f64> = (0..=2 * m).map(|_| r.random_range(-1.0..1.0)).collect();
            let opts = KrylovOptions {
                max_poles: m,
                tol: 0.0,
                ..Default::default()
            };
            let res = krylov_update(&a, &bf, &j, &bf, &PoleSequence::polynomial(), &mono_poly(&c), &opts).unwrap();
            let d = a.to_dense();
            let want = poly_powers(&c, &(&d + &bf * &j * bf.transpose())) - poly_powers(&c, &d);
            worst[2] = worst[2].max((update_trace(&res) - want.trace()).abs() / want.norm());
        }
    }

    // (d) splitting: full output exact on degree m, diagonal exact on degree 2m + 1
    for m in 1..=3 {
        for b in 1..=2 {
            for sym in [false, true] {
                let nn = 96;
                let a = if sym {
                    random_symmetric_banded(nn, b, &mut r)
                } else {
                    random_banded(nn, b, b, &mut r)
                };
                let d = a.to_dense();
                let s = 2 * m * b;
                let c: Vec<f64> = (0..=m).map(|_| r.random_range(-1.0..1.0)).collect();
                let full = split_funm_fixed(&a, s, &mono_poly(&c)).unwrap().to_dense();
                worst[3] = worst[3].max(rel(&full, &poly_powers(&c, &d)));
                let c: Vec<f64> = (0..=2 * m + 1).map(|_| r.random_range(-1.0..1.0)).collect();
                let diag = split_diag(&a, SplitMode::Fixed(s), &mono_poly(&c)).unwrap();
                let want = poly_powers(&c, &d).diagonal();
                worst[4] = worst[4].max((diag - &want).norm() / want.norm());
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = worst.iter().all(|w| *w <= 1e-9) && secs < 30.0;
    outcome(
        pass,
        format!(
            "poly {:.1e}, rational {:.1e}, trace {:.1e}, split full {:.1e}, split diag {:.1e} (limit 1e-9); {:.1} s (limit 30 s)",
            worst[0], worst[1], worst[2], worst[3], worst[4], secs
        ),
    )
}

fn criterion_2() -> Outcome {
    let a = normalized_tridiag(512, 202);
    let d = a.to_dense();
    let exact = sym_funm(&d, f64::exp);
    let mut cfg = DcConfig::new(FunctionSpec::Exp, PoleSequence::polynomial());
    cfg.eps = 1e-8;
    cfg.n_min = 64;
    let out = dc_funm(&a, &cfg).unwrap().as_full().unwrap().to_dense();
    let dc_err = rel(&out, &exact);

    // single split: fixed splitting against the windowed projection
    let a = normalized_tridiag(64, 203);
    let d = a.to_dense();
    let split = split_funm_fixed(&a, 32, &FunctionSpec::Exp).unwrap().to_dense();
    let mut expect = DMatrix::zeros(64, 64);
    expect
        .view_mut((0, 0), (32, 32))
        .copy_from(&sym_funm(&d.view((0, 0), (32, 32)).into_owned(), f64::exp));
    expect
        .view_mut((32, 32), (32, 32))
        .copy_from(&sym_funm(&d.view((32, 32), (32, 32)).into_owned(), f64::exp));
    let mut u = DMatrix::zeros(64, 32);
    for k in 0..32 {
        u[(16 + k, k)] = 1.0;
    }
    let h = u.transpose() * &d * &u;
    let mut g = h.clone();
    g.view_mut((0, 16), (16, 16)).fill(0.0);
    g.view_mut((16, 0), (16, 16)).fill(0.0);
    let x = sym_funm(&h, f64::exp) - sym_funm(&g, f64::exp);
    expect += &u * x * u.transpose();
    let win_err = (&split - &expect).norm() / expect.norm();

    let sp = offdiag_split(&a, 32, false).unwrap();
    let opts = KrylovOptions {
        max_poles: 16,
        tol: 0.0,
        ..Default::default()
    };
    let upd = krylov_update(&sp.block_diagonal(), &sp.b, &sp.j, &sp.c, &PoleSequence::polynomial(), &FunctionSpec::Exp, &opts).unwrap();
    let mut blk = DMatrix::zeros(64, 64);
    blk.view_mut((0, 0), (32, 32))
        .copy_from(&funm_dense(&d.view((0, 0), (32, 32)).into_owned(), &FunctionSpec::Exp).unwrap());
    blk.view_mut((32, 32), (32, 32))
        .copy_from(&funm_dense(&d.view((32, 32), (32, 32)).into_owned(), &FunctionSpec::Exp).unwrap());
    let kry_err = (&split - (blk + upd.to_dense())).norm() / split.norm();

    outcome(
        dc_err <= 1e-7 && win_err <= 1e-10 && kry_err <= 1e-10,
        format!(
            "dc exp n=512 rel err {:.2e} (limit 1e-7); splitting vs window projection {:.1e}, vs 16-step Krylov {:.1e} (limit 1e-10)",
            dc_err, win_err, kry_err
        ),
    )
}

fn criterion_3() -> Outcome {
    let a = gen_gmrf(512, 3.0, 0.02, 303).unwrap();
    let t0 = Instant::now();
    let mut cfg = DcConfig::new(FunctionSpec::InvSqrt, PoleSequence::extended());
    cfg.eps = 1e-8;
    cfg.n_min = 64;
    cfg.spd_rank_b = true;
    let (out, rep) = dc_funm_report(&a, &cfg).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let exact = sym_funm(&a.to_dense(), |x| 1.0 / x.sqrt());
    let err = rel(&out.as_full().unwrap().to_dense(), &exact);
    let fallbacks = rep.updates.iter().filter(|u| u.spd_fallback).count();
    outcome(
        err <= 1e-6 && secs <= 60.0,
        format!(
            "GMRF n=512 bandwidth {} inv_sqrt rel err {:.2e} (limit 1e-6), {:.2} s (limit 60 s), {} rank-b fallbacks",
            a.bandwidth(),
            err,
            secs,
            fallbacks
        ),
    )
}

fn criterion_4() -> Outcome {
    let n = 4096;
    let a = gen_anderson(n, 404);
    let f = FunctionSpec::fermi_dirac(1.84, 0.5);
    let t0 = Instant::now();
    let res = split_funm_adaptive(&a, 1e-5, &f, 32).unwrap();
    let secs = t0.elapsed().as_secs_f64();
    let exact = sym_funm(&a.to_dense(), |x| f.eval(x));
    let norm = exact.norm();
    let err = banded_rel_err(&res.f, &exact, norm);
    let nnz_split = res.nnz() as f64 / n as f64;

    // cheapest Chebyshev interpolant on [-2, 3] reaching the same error
    let mut matched = None;
    for d in 1..200 {
        let p = chebyshev_funm(&a, &f, (-2.0, 3.0), d).unwrap();
        let e = banded_rel_err(&p, &exact, norm);
        if e <= err {
            matched = Some((d, p.nnz() as f64 / n as f64, e));
            break;
        }
    }
    let d_rule = (res.nnz() as f64 / (2.0 * n as f64)).ceil() as usize;
    let rule_err = banded_rel_err(&chebyshev_funm(&a, &f, (-2.0, 3.0), d_rule).unwrap(), &exact, norm);
    let Some((d, nnz_cheb, e_cheb)) = matched else {
        return outcome(false, format!("splitting rel err {:.2e}; no Chebyshev degree below 200 matches", err));
    };
    let ratio = nnz_split / nnz_cheb;
    outcome(
        err <= 1e-4 && (0.5..=2.0).contains(&ratio),
        format!(
            "Anderson n=4096 rel err {:.2e} (limit 1e-4), nnz/n {:.1}, {:.2} s; Chebyshev degree {} reaches {:.2e} with nnz/n {:.1}, ratio {:.2} (limit [0.5, 2]); degree {} from nnz gives {:.2e}",
            err, nnz_split, secs, d, e_cheb, nnz_cheb, ratio, d_rule, rule_err
        ),
    )
}

fn criterion_5() -> Outcome {
    let n = 2048;
    let a = gen_a3(n);
    let res = split_funm_adaptive(&a, 1e-8, &FunctionSpec::Sqrt, 32).unwrap();
    let exact = sym_funm(&a.to_dense(), f64::sqrt);
    let err = banded_rel_err(&res.f, &exact, exact.norm());
    let first = res.plan.blocks.first().unwrap().len();
    let last = res.plan.blocks.last().unwrap().len();
    outcome(
        err <= 1e-6 && first >= 2 * last,
        format!(
            "A3 n=2048 sqrt rel err {:.2e} (limit 1e-6); {} blocks, first {} last {} (need first >= 2 last)",
            err,
            res.plan.blocks.len(),
            first,
            last
        ),
    )
}

fn criterion_6() -> Outcome {
    let n = 2048;
    let mut pass = true;
    let mut lines = Vec::new();
    let suite = gen_test_suite(n);
    for (name, a) in suite.iter() {
        let (f, sf): (FunctionSpec, fn(f64) -> f64) = if *name == "A3" {
            (FunctionSpec::Sqrt, f64::sqrt)
        } else {
            (FunctionSpec::Exp, f64::exp)
        };
        let exact = sym_funm(&a.to_dense(), sf);
        let norm = exact.norm();
        let interval = spectral_interval(a);
        let cheb: Vec<(f64, f64)> = (1..=64)
            .map(|d| {
                let p = chebyshev_funm(a, &f, interval, d).unwrap();
                (p.nnz() as f64, banded_rel_err(&p, &exact, norm))
            })
            .collect();
        let mut wins = 0;
        let mut total = 0;
        for s in [4, 8, 16, 32, 64] {
            let sp = split_funm_fixed(a, s, &f).unwrap();
            let (nnz, e_split) = (sp.nnz() as f64, banded_rel_err(&sp, &exact, norm));
            // Chebyshev error at the same nnz, interpolated in log scale
            let Some(k) = cheb.windows(2).position(|w| w[0].0 <= nnz && nnz <= w[1].0) else {
                continue;
            };
            let (x0, y0) = cheb[k];
            let (x1, y1) = cheb[k + 1];
            let t = (nnz - x0) / (x1 - x0);
            let e_cheb = (y0.ln() * (1.0 - t) + y1.ln() * t).exp();
            if e_split.max(e_cheb) < 1e-13 {
                continue;
            }
            if std::env::var("ACCEPT_VERBOSE").is_ok() {
                eprintln!("{name} s={s} nnz/n {:.1} split {:.3e} cheb {:.3e}", nnz / n as f64, e_split, e_cheb);
            }
            total += 1;
            if e_split <= e_cheb {
                wins += 1;
            }
        }
        let expect_split = *name != "A1";
        let ok = total > 0 && if expect_split { wins == total } else { wins == 0 };
        pass &= ok;
        lines.push(format!(
            "{}: splitting better at {}/{} matched points (expected {})",
            name,
            wins,
            total,
            if expect_split { "all" } else { "none" }
        ));
    }
    outcome(pass, lines.join("; "))
}

fn criterion_7() -> Outcome {
    let n = 300;
    let mut a = normalized_tridiag(n, 707);
    a.scale(8.0);
    let d = a.to_dense();
    let mut r = rng(708);
    let mut bf = random_dense(n, 2, &mut r);
    for mut c in bf.column_iter_mut() {
        c.normalize_mut();
    }
    let j = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.3, -0.5]);
    let fa = sym_funm(&d, f64::exp);
    let far = sym_funm(&(&d + &bf * &j * bf.transpose()), f64::exp);
    let exact = &far - &fa;
    let scale = exact.norm();
    // roundoff level of the reference difference
    let floor = 1e3 * f64::EPSILON * far.norm().max(fa.norm()) / scale;
    let (mut full, mut diag, mut trace) = (Vec::new(), Vec::new(), Vec::new());
    for m in 1..=12 {
        let opts = KrylovOptions {
            max_poles: m,
            tol: 0.0,
            ..Default::default()
        };
        let res = krylov_update(&a, &bf, &j, &bf, &PoleSequence::polynomial(), &FunctionSpec::Exp, &opts).unwrap();
        let diff = res.to_dense() - &exact;
        full.push((m, diff.norm() / scale));
        diag.push((m, diff.diagonal().norm() / scale));
        trace.push((m, diff.trace().abs() / scale));
    }
    let rate = |v: &[(usize, f64)]| {
        let pts: Vec<_> = v.iter().filter(|(m, e)| *m >= 3 && *e > floor).collect();
        let steps: Vec<usize> = pts.iter().map(|p| p.0).collect();
        let errs: Vec<f64> = pts.iter().map(|p| p.1).collect();
        (fit_rate(&steps, &errs), steps.len())
    };
    if std::env::var("ACCEPT_VERBOSE").is_ok() {
        for k in 0..full.len() {
            eprintln!("m={} full {:.3e} diag {:.3e} trace {:.3e}", full[k].0, full[k].1, diag[k].1, trace[k].1);
        }
    }
    let (rf, nf) = rate(&full);
    let (rd, nd) = rate(&diag);
    let (rt, nt) = rate(&trace);
    let ok_trace = rt <= 1.3 * rf * rf;
    let ok_diag = rd <= 1.3 * rf && rf <= 1.3 * rd;
    outcome(
        ok_trace && ok_diag && nf.min(nd).min(nt) >= 3,
        format!(
            "rates over steps 3..12 above {:.0e}: full {:.3} ({} pts), diag {:.3} ({} pts), trace {:.3} ({} pts); trace/full^2 = {:.2} (limit 1.3), diag/full = {:.2} (limit 1/1.3..1.3)",
            floor, rf, nf, rd, nd, rt, nt, rt / (rf * rf), rd / rf
        ),
    )
}

fn criterion_8() -> Outcome {
    let n = 256;
    let mut lines = Vec::new();
    let mut pass = true;
    let mut a = normalized_tridiag(n, 808);
    a.scale(8.0);
    let d = a.to_dense();
    let exact = sym_funm(&d, f64::exp);
    let (lo, hi) = spectral_interval(&a);

    // splitting: ||.||_2 <= 4 ChebErr(m) with m = s / 2
    let mut worst = 0.0f64;
    for s in [4, 8, 12, 16, 20] {
        let m = s / 2;
        let err = norm2(&(split_funm_fixed(&a, s, &FunctionSpec::Exp).unwrap().to_dense() - &exact));
        let bound = 4.0 * chebyshev_error(&FunctionSpec::Exp, lo, hi, m, 4000);
        worst = worst.max(err / bound);
    }
    pass &= worst <= 1.0;
    lines.push(format!("splitting err/bound max {:.2e}", worst));

    // trace of a low-rank update: |err| <= 4 n ChebErr(2m)
    let mut r = rng(809);
    let bf = random_dense(n, 1, &mut r);
    let j = DMatrix::from_element(1, 1, 1.0);
    let ar = &d + &bf * &j * bf.transpose();
    let ev: Vec<f64> = sym_eigenvalues(&d).into_iter().chain(sym_eigenvalues(&ar)).collect();
    let lo2 = ev.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi2 = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exact_tr = sym_funm(&ar, f64::exp).trace() - exact.trace();
    let mut worst = 0.0f64;
    for m in 2..=8 {
        let opts = KrylovOptions {
            max_poles: m,
            tol: 0.0,
            ..Default::default()
        };
        let res = krylov_update(&a, &bf, &j, &bf, &PoleSequence::polynomial(), &FunctionSpec::Exp, &opts).unwrap();
        let err = (update_trace(&res) - exact_tr).abs();
        let bound = 4.0 * n as f64 * chebyshev_error(&FunctionSpec::Exp, lo2, hi2, 2 * m, 4000);
        worst = worst.max(err / bound);
    }
    pass &= worst <= 1.0;
    lines.push(format!("trace err/bound max {:.2e}", worst));

    // divide and conquer: ||.||_2 <= 4 L ChebErr(m)
    let mut worst = 0.0f64;
    for m in [4, 6, 8, 10] {
        let mut cfg = DcConfig::new(FunctionSpec::Exp, PoleSequence::polynomial());
        cfg.n_min = 32;
        cfg.max_poles = m;
        cfg.eps = 1e-15;
        let (out, rep) = dc_funm_report(&a, &cfg).unwrap();
        let levels = rep.per_level().len();
        let err = norm2(&(out.as_full().unwrap().to_dense() - &exact));
        let bound = 4.0 * levels as f64 * chebyshev_error(&FunctionSpec::Exp, lo, hi, m, 4000);
        worst = worst.max(err / bound);
    }
    pass &= worst <= 1.0;
    lines.push(format!("dc err/bound max {:.2e}", worst));
    outcome(pass, lines.join("; "))
}

fn criterion_9() -> Outcome {
    let f = FunctionSpec::fermi_dirac(1.84, 0.5);
    let mut split_times = Vec::new();
    for k in 12..=14 {
        let a = gen_anderson(1 << k, 900 + k as u64);
        let t0 = Instant::now();
        split_funm_adaptive(&a, 1e-5, &f, 32).unwrap();
        split_times.push(t0.elapsed().as_secs_f64());
    }
    let mut dc_times = Vec::new();
    for k in 10..=12 {
        let delta = 0.02 * 2f64.powi(9 - k);
        let a = gen_gmrf(1 << k, 3.0, delta, 950 + k as u64).unwrap();
        let mut cfg = DcConfig::new(FunctionSpec::InvSqrt, PoleSequence::extended());
        cfg.eps = 1e-8;
        cfg.n_min = 64;
        cfg.spd_rank_b = true;
        let t0 = Instant::now();
        dc_funm(&a, &cfg).unwrap();
        dc_times.push(t0.elapsed().as_secs_f64());
    }
    let ratios = |t: &[f64]| t.windows(2).map(|w| w[1] / w[0]).collect::<Vec<_>>();
    let rs = ratios(&split_times);
    let rd = ratios(&dc_times);
    let ok = rs.iter().all(|r| (1.5..=3.0).contains(r)) && rd.iter().all(|r| *r <= 3.5);
    Outcome {
        pass: ok,
        warn_only: true,
        detail: format!(
            "splitting times {:?} s, ratios {:.2?} (range [1.5, 3]); dc GMRF times {:?} s, ratios {:.2?} (limit 3.5)",
            split_times.iter().map(|t| (t * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            rs,
            dc_times.iter().map(|t| (t * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
            rd
        ),
    }
}

fn main() {
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 exactness suite", criterion_1),
        ("2 oracle equivalence", criterion_2),
        ("3 GMRF inverse square root", criterion_3),
        ("4 Anderson Fermi-Dirac", criterion_4),
        ("5 A3 square root", criterion_5),
        ("6 spectral adaptivity", criterion_6),
        ("7 double-speed trace convergence", criterion_7),
        ("8 bound verification", criterion_8),
        ("9 complexity smoke test", criterion_9),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.starts_with(f.as_str())) {
            continue;
        }
        let t0 = Instant::now();
        let o = run();
        let tag = match (o.pass, o.warn_only) {
            (true, _) => "PASS",
            (false, true) => "WARN",
            (false, false) => "FAIL",
        };
        if !o.pass && !o.warn_only {
            failed += 1;
        }
        println!("criterion {name}: {tag} [{:.1} s] {}", t0.elapsed().as_secs_f64(), o.detail);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
