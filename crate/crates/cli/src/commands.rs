use serde_json::json;

use scatter1d::jost::{lambda_grid, JostField, JostOptions, ScatteringData, Side};
use scatter1d::kernels::{growth_table, KernelField, KernelKind};
use scatter1d::liouville::{build_map, gaussian_bump_preset, variable_coefficient_decay, LiouvilleOptions};
use scatter1d::oracles::PoschlTeller;
use scatter1d::propagator::{decay_fit, log_times, DecayFit, DecayOptions, Equation, SpectralData};
use scatter1d::waveop::{endpoint_probe, Direction, WaveOpConfig, WaveOperator};
use scatter1d::{ComplexSignal, Grid, SampledPotential, C};

use crate::config::{EquationName, ExperimentConfig};
use crate::output::{Gate, Outputs};
use crate::Failure;

fn grid(cfg: &ExperimentConfig) -> Result<Grid<f64>, Failure> {
    Ok(Grid::new(cfg.grid_min, cfg.grid_max, cfg.grid_points)?)
}

/// Builtin potential on the configured grid, or a CSV table on its own grid.
pub fn potential(cfg: &ExperimentConfig) -> Result<SampledPotential<f64>, Failure> {
    match cfg.potential.as_str() {
        "zero" => Ok(SampledPotential::zero(grid(cfg)?)),
        "poschl-teller" => Ok(SampledPotential::poschl_teller(grid(cfg)?, 1.0)),
        "well" => Ok(SampledPotential::square_well(grid(cfg)?, cfg.depth, cfg.half_width)?),
        path if path.ends_with(".csv") || std::path::Path::new(path).exists() => Ok(SampledPotential::from_csv(path)?),
        other => Err(Failure::Input(format!("unknown potential '{other}'"))),
    }
}

fn jost_options(cfg: &ExperimentConfig) -> JostOptions<f64> {
    JostOptions { tol: cfg.tol, ..JostOptions::default() }
}

fn finish(out: Outputs, command: &str, cfg: &ExperimentConfig, constants: serde_json::Value, gates: &[Gate]) -> Result<(), Failure> {
    if out.manifest(command, cfg, constants, gates)? {
        Ok(())
    } else {
        let failed: Vec<&str> = gates.iter().filter(|g| !g.passed).map(|g| g.name.as_str()).collect();
        Err(Failure::Regression(failed.join(", ")))
    }
}

pub fn jost(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let v = potential(cfg)?;
    let lambda = lambda_grid(cfg.lambda_max, cfg.lambda_points)?;
    let opts = jost_options(cfg);
    let field = JostField::solve(&v, &lambda, &opts)?;
    let data = ScatteringData::from_field(&field, &v, &opts)?;
    let mut out = Outputs::create(&cfg.out)?;
    let w = &data.wronskian;
    out.json(
        "scattering.json",
        &json!({
            "resonant": data.resonant(),
            "resonance": data.resonance,
            "bound_energies": data.bound_states.iter().map(|b| b.energy).collect::<Vec<_>>(),
            "l1_norm": v.l1_norm(),
            "grid": v.grid,
            "lambda_max": cfg.lambda_max,
            "lambda_points": cfg.lambda_points,
        }),
    )?;
    out.csv(
        "wronskian.csv",
        &["lambda", "re_w", "im_w"],
        lambda.iter().zip(w).map(|(l, w)| vec![*l, w.re, w.im]),
    )?;
    let xs = v.grid.n.div_ceil(64).max(1);
    let ls = lambda.len().div_ceil(129).max(1);
    let rows = (0..lambda.len()).step_by(ls).flat_map(|k| {
        let col = &field.columns[k];
        let l = lambda[k];
        (0..v.grid.n).step_by(xs).map(move |i| {
            vec![l, v.grid.x(i), col.m_plus[i].re, col.m_plus[i].im, col.m_minus[i].re, col.m_minus[i].im]
        })
    });
    out.csv("m_field.csv", &["lambda", "x", "re_m_plus", "im_m_plus", "re_m_minus", "im_m_minus"], rows)?;

    let mut gates = Vec::new();
    match cfg.potential.as_str() {
        "zero" => {
            let err = lambda.iter().zip(w).fold(0.0f64, |m, (l, w)| m.max((w - C::new(0.0, -2.0 * l)).norm()));
            gates.push(Gate::at_most("free_wronskian", "max |W(λ) + 2iλ| for the zero potential", err, 1e-10));
        }
        "poschl-teller" => {
            let pt = PoschlTeller;
            let mut err = 0.0f64;
            for (k, col) in field.columns.iter().enumerate() {
                for i in 0..v.grid.n {
                    err = err.max((col.m_plus[i] - pt.m_plus(C::new(lambda[k], 0.0), v.grid.x(i))).norm());
                }
            }
            gates.push(Gate::at_most("closed_form_m_plus", "sup |m_+ - (λ + i tanh x)/(λ + i)| over the grid", err, 1e-5));
            if let Some(r) = &data.resonance {
                gates.push(Gate::at_most("zero_energy_resonance", "|W(0)| / sup_{|λ|≤1} |W|", r.ratio, 1e-4));
            }
        }
        _ => {}
    }
    finish(out, "jost", cfg, json!({ "resonance_threshold": 1e-4, "jost_tol": cfg.tol }), &gates)
}

pub fn kernels(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let k = &cfg.kernels;
    let v = potential(cfg)?;
    let samples: Vec<f64> = {
        let n = 26;
        let step = (k.fit_max - k.fit_min) / (n - 1) as f64;
        let pos: Vec<f64> = (0..n).map(|i| k.fit_min + i as f64 * step).filter(|x| v.grid.contains(*x) && v.grid.contains(-*x)).collect();
        pos.iter().rev().map(|x| -x).chain(pos.iter().copied()).collect()
    };
    if samples.len() < 6 {
        return Err(Failure::Input("the fit window does not fit inside the grid".into()));
    }
    let exponents = |v: &SampledPotential<f64>| -> Result<Vec<(Side, KernelKind, scatter1d::kernels::GrowthTable)>, Failure> {
        let field = KernelField::marchenko(v, &samples)?;
        let mut t = Vec::new();
        for side in [Side::Plus, Side::Minus] {
            for kind in [KernelKind::B, KernelKind::C] {
                t.push((side, kind, growth_table(&field, side, kind, k.fit_min, k.fit_max)?));
            }
        }
        Ok(t)
    };
    let coarse = exponents(&v)?;
    let refined = if k.refine {
        let fine = match cfg.potential.as_str() {
            "zero" => SampledPotential::zero(v.grid.refined()),
            "poschl-teller" => SampledPotential::poschl_teller(v.grid.refined(), 1.0),
            "well" => SampledPotential::square_well(v.grid.refined(), cfg.depth, cfg.half_width)?,
            _ => v.resampled(v.grid.refined(), None)?,
        };
        Some(exponents(&fine)?)
    } else {
        None
    };
    let mut out = Outputs::create(&cfg.out)?;
    for (side, name) in [(Side::Plus, "growth_plus.csv"), (Side::Minus, "growth_minus.csv")] {
        let b = coarse.iter().find(|t| t.0 == side && t.1 == KernelKind::B).expect("computed");
        let c = coarse.iter().find(|t| t.0 == side && t.1 == KernelKind::C).expect("computed");
        out.csv(name, &["x", "l1_b", "l1_c"], (0..b.2.x.len()).map(|i| vec![b.2.x[i], b.2.l1[i], c.2.l1[i]]))?;
    }
    let summary: Vec<_> = coarse
        .iter()
        .enumerate()
        .map(|(j, (side, kind, t))| {
            json!({
                "side": side, "kind": kind, "exponent": t.exponent, "stderr": t.exponent_stderr,
                "degenerate": t.degenerate,
                "refined_exponent": refined.as_ref().map(|r| r[j].2.exponent),
            })
        })
        .collect();
    out.json("growth.json", &summary)?;

    let mut gates = Vec::new();
    for (j, (side, kind, t)) in coarse.iter().enumerate() {
        if *side != Side::Plus {
            continue;
        }
        let (cap, label) = match kind {
            KernelKind::B => (k.b_cap, "b"),
            _ => (k.c_cap, "c"),
        };
        gates.push(Gate::at_most(
            &format!("growth_exponent_{label}"),
            &format!("log-log slope of ||{}_+(·,x)||_1 on x ∈ [-{}, -{}]", label.to_uppercase(), k.fit_max, k.fit_min),
            t.exponent,
            cap,
        ));
        if let Some(r) = &refined {
            gates.push(Gate::at_most(
                &format!("refinement_drift_{label}"),
                "increase of the exponent when the grid spacing is halved",
                r[j].2.exponent - t.exponent,
                k.drift_tol,
            ));
        }
    }
    finish(out, "kernels", cfg, json!({ "fit_window": [k.fit_min, k.fit_max], "b_cap": k.b_cap, "c_cap": k.c_cap }), &gates)
}

pub fn waveop(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let w = &cfg.waveop;
    let v = potential(cfg)?;
    let mut config = WaveOpConfig::for_potential(&v);
    config.n_series = w.n_series;
    config.band = w.band;
    config.jost = jost_options(cfg);
    if let Some(l0) = cfg.cutoff {
        config.cutoff.lambda0 = l0;
    }
    let op = WaveOperator::build(&v, &config, Direction::Plus)?;
    let g = ComplexSignal::from_fn(v.grid, |x| {
        let (s, k0) = (1.5, 2.0);
        C::new(0.0, k0 * x).exp() * (-(x * x) / (2.0 * s * s)).exp()
    });
    let wg = op.apply(&g)?;
    let ratio = wg.l2_norm() / g.l2_norm();
    let mut gates = vec![Gate::at_most(
        "unitarity",
        "| ||W_+ g||_2 / ||g||_2 - 1 | for a packet with negligible zero-frequency content",
        (ratio - 1.0).abs(),
        w.unitarity_tol,
    )];
    if v.is_zero() {
        let err = wg.values.iter().zip(&g.values).fold(0.0f64, |m, (a, b)| m.max((a - b).norm()));
        gates.push(Gate::at_most("free_identity", "sup |W_+ g - g| for V = 0", err, w.identity_tol));
    }
    let probe = endpoint_probe(&op, &v, 2 * w.probes, cfg.seed)?;
    gates.push(Gate {
        name: "endpoint_ratio_finite".into(),
        checks: "max ||W_+ g||_∞ / (||g||_∞ + ||H g||_∞) over the random suite is finite".into(),
        value: probe.max_ratio,
        bound: f64::MAX,
        passed: probe.max_ratio.is_finite(),
    });
    gates.push(Gate::at_most(
        "endpoint_ratio_stable",
        "relative change of the maximal endpoint ratio when the suite size doubles",
        probe.variation,
        w.probe_variation,
    ));
    let mut out = Outputs::create(&cfg.out)?;
    out.json(
        "waveop.json",
        &json!({
            "nodes": op.len(), "series_terms": op.series_terms, "series_tail": op.series_tail,
            "unitarity_ratio": ratio, "endpoint_probe": probe, "config": config,
        }),
    )?;
    out.csv(
        "waveop_packet.csv",
        &["x", "re_g", "im_g", "re_wg", "im_wg"],
        (0..v.grid.n).map(|i| vec![v.grid.x(i), g.values[i].re, g.values[i].im, wg.values[i].re, wg.values[i].im]),
    )?;
    finish(out, "waveop", cfg, json!({ "direction": "plus", "probes": w.probes, "seed": cfg.seed }), &gates)
}

fn decay_options(cfg: &ExperimentConfig) -> DecayOptions<f64> {
    let d = &cfg.decay;
    let equation = match d.equation {
        EquationName::Schrodinger => Equation::Schrodinger,
        EquationName::KleinGordon => Equation::KleinGordon,
    };
    DecayOptions { times: log_times(d.t_min, d.t_max, d.times), ..DecayOptions::standard(equation) }
}

fn decay_outputs(out: &mut Outputs, name: &str, fit: &DecayFit) -> Result<(), Failure> {
    out.csv(
        &format!("{name}.csv"),
        &["t", "norm", "fitted"],
        (0..fit.times.len()).map(|i| vec![fit.times[i], fit.norms[i], fit.fitted[i]]),
    )?;
    out.json(&format!("{name}.json"), fit)
}

fn decay_gate(cfg: &ExperimentConfig, fit: &DecayFit) -> Gate {
    Gate::at_most(
        "decay_exponent",
        "|fitted exponent of ||P_ac u(t)||_q - (1/q - 1/2)|",
        (fit.alpha_hat - fit.alpha_theory).abs(),
        cfg.decay.band(),
    )
}

pub fn decay(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let v = potential(cfg)?;
    let spec = SpectralData::new(&v, &jost_options(cfg))?;
    let s = cfg.decay.width;
    let f = ComplexSignal::from_real(v.grid, |x| (-(x * x) / (2.0 * s * s)).exp());
    let fit = decay_fit(&spec, &f, cfg.decay.q, &decay_options(cfg))?;
    let mut out = Outputs::create(&cfg.out)?;
    decay_outputs(&mut out, "decay", &fit)?;
    let gates = [decay_gate(cfg, &fit)];
    finish(out, "decay", cfg, json!({ "alpha_band": cfg.decay.band(), "spacing": 0.15, "noise_floor": 1e-12 }), &gates)
}

fn read_coefficients(path: &std::path::Path, grid: &Grid<f64>) -> Result<(Vec<f64>, Vec<f64>), Failure> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    let (mut xs, mut a, mut b) = (Vec::new(), Vec::new(), Vec::new());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Failure::Input(e.to_string()))?;
        if rec.len() < 3 {
            return Err(Failure::Input("coefficient rows need x, a, b".into()));
        }
        let p = |s: &str| s.parse::<f64>().map_err(|_| Failure::Input(format!("cannot parse '{s}'")));
        xs.push(p(&rec[0])?);
        a.push(p(&rec[1])?);
        b.push(p(&rec[2])?);
    }
    let pa = SampledPotential::from_table(&xs, &a)?.resampled(*grid, None)?;
    let pb = SampledPotential::from_table(&xs, &b)?.resampled(*grid, None)?;
    Ok((pa.values, pb.values))
}

pub fn liouville(cfg: &ExperimentConfig) -> Result<(), Failure> {
    let l = &cfg.liouville;
    let g = grid(cfg)?;
    let (a, b, v) = match (&l.preset, &l.coefficients) {
        (Some(p), None) if p == "gaussian-bump" => gaussian_bump_preset(g),
        (Some(p), None) => return Err(Failure::Input(format!("unknown preset '{p}'"))),
        (None, Some(path)) => {
            let (a, b) = read_coefficients(path, &g)?;
            let v = if cfg.potential == "zero" { SampledPotential::zero(g) } else { potential(cfg)?.resampled(g, None)? };
            (a, b, v)
        }
        _ => return Err(Failure::Input("give exactly one of --preset or --coefficients".into())),
    };
    let opts = LiouvilleOptions { c0: l.c0, residual_tol: l.residual_tol };
    let map = build_map(&a, &b, &v, &opts)?;
    let meta = map.metadata();
    let mut out = Outputs::create(&cfg.out)?;
    out.json("liouville.json", &meta)?;
    out.csv(
        "liouville_map.csv",
        &["x", "a", "b", "v", "c", "sigma", "v_tilde"],
        (0..g.n).map(|i| vec![g.x(i), map.a[i], map.b[i], map.v[i], map.c[i], map.sigma[i], map.v_tilde_x[i]]),
    )?;
    let y = map.y_grid();
    out.csv("v_tilde.csv", &["y", "v_tilde"], (0..y.n).map(|j| vec![y.x(j), map.v_tilde.values[j]]))?;
    let adopted = match meta.variants.adopted {
        scatter1d::liouville::Variant::Printed => meta.variants.printed_residual,
        scatter1d::liouville::Variant::Corrected => meta.variants.corrected_residual,
    };
    let mut gates = vec![
        Gate::at_most(
            "manufactured_residual",
            "interior residual of the original equation for σ·w∘c with w = e^{-y²/4+iy}, adopted potential variant",
            adopted,
            l.residual_tol,
        ),
        Gate {
            name: "coefficient_hypotheses".into(),
            checks: "a ≥ c0 and the weighted norms of a', b, a'', b', V are carried by the interior".into(),
            value: meta.hypotheses.edge_fraction,
            bound: 1e-3,
            passed: meta.hypotheses.passed,
        },
    ];
    if l.decay {
        let s = cfg.decay.width;
        let f = ComplexSignal::from_real(g, |x| (-(x * x) / (2.0 * s * s)).exp());
        let r = variable_coefficient_decay(&map, &f, cfg.decay.q, &decay_options(cfg), &jost_options(cfg))?;
        decay_outputs(&mut out, "liouville_decay", &r.fit)?;
        gates.push(decay_gate(cfg, &r.fit));
    }
    let constants = json!({
        "adopted_variant": meta.variants.adopted,
        "variant_decisive": meta.variants.decisive,
        "printed_residual": meta.variants.printed_residual,
        "corrected_residual": meta.variants.corrected_residual,
    });
    finish(out, "liouville", cfg, constants, &gates)
}
