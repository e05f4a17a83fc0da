//! Exhaustive ground-truth engine: DDT rows, full differential spectra,
//! uniformity, and formula-vs-oracle differ reports.
//!
//! Function tables are materialized before any scan so the inner loops are
//! plain lookups. Rows (fixed a) are independent work units; the histogram
//! merge is an exact integer sum, so results are identical for any degree of
//! parallelism. `uniformity_oracle` deliberately does a full scan with no
//! early exit.

use crate::field::{Elem, FieldCtx};
use crate::nh::{self, NHParams, Spectrum, SpectrumMethod};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("derivative direction a must be nonzero")]
    ZeroDirection,
}

/// Counts of D_a f(x) = b for every b, one pass over x. Row sums to q.
pub fn ddt_row(ctx: &FieldCtx, table: &[Elem], a: Elem) -> Result<Vec<u64>, OracleError> {
    if a.is_zero() {
        return Err(OracleError::ZeroDirection);
    }
    debug_assert_eq!(table.len() as u64, ctx.q());
    let mut row = vec![0u64; ctx.q() as usize];
    for x in ctx.enumerate() {
        let b = ctx.sub(table[ctx.add(x, a).0 as usize], table[x.0 as usize]);
        row[b.0 as usize] += 1;
    }
    Ok(row)
}

/// Aggregate all DDT rows into the spectrum [omega_0 .. omega_delta] and
/// verify both count identities before returning.
pub fn spectrum_oracle(ctx: &FieldCtx, table: &[Elem]) -> Spectrum {
    let q = ctx.q();
    let hist = ctx
        .nonzero()
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&a| {
            let row = ddt_row(ctx, table, a).expect("a != 0");
            let mut h = vec![0u64; q as usize + 1];
            for &count in &row {
                h[count as usize] += 1;
            }
            h
        })
        .reduce(
            || vec![0u64; q as usize + 1],
            |mut acc, h| {
                for (slot, v) in acc.iter_mut().zip(h) {
                    *slot += v;
                }
                acc
            },
        );
    let delta = hist
        .iter()
        .rposition(|&w| w > 0)
        .expect("spectrum is nonempty") as u64;
    let omegas: Vec<u64> = hist[..=delta as usize].to_vec();
    let spectrum = Spectrum {
        delta,
        omegas,
        method: SpectrumMethod::Oracle,
        notes: vec![],
    };
    assert!(
        spectrum.identities_hold(q),
        "spectrum identities violated: internal consistency bug"
    );
    spectrum
}

/// Max DDT entry over all a != 0; full scan, no early exit.
pub fn uniformity_oracle(ctx: &FieldCtx, table: &[Elem]) -> u64 {
    ctx.nonzero()
        .map(|a| {
            ddt_row(ctx, table, a)
                .expect("a != 0")
                .into_iter()
                .max()
                .unwrap()
        })
        .max()
        .unwrap()
}

#[derive(Debug, Clone, Serialize)]
pub struct DiffReport {
    pub spectrum_oracle: Spectrum,
    pub spectrum_formula: Option<Spectrum>,
    /// None when no formula applies (open class / gated layer).
    pub agree: Option<bool>,
    pub mismatches: Vec<(usize, u64, u64)>,
    pub formula_note: Option<String>,
}

/// Run oracle and (when supported) formula spectra for f_u and align them.
pub fn differ(ctx: &FieldCtx, u: Elem) -> Result<DiffReport, nh::NHError> {
    let params = NHParams::new(ctx, u)?;
    let oracle = spectrum_oracle(ctx, &params.table());
    match nh::spectrum_formula(&params) {
        Ok(formula) => {
            let len = oracle.omegas.len().max(formula.omegas.len());
            let get = |v: &[u64], i: usize| v.get(i).copied().unwrap_or(0);
            let mismatches: Vec<(usize, u64, u64)> = (0..len)
                .filter_map(|i| {
                    let (o, f) = (get(&oracle.omegas, i), get(&formula.omegas, i));
                    (o != f).then_some((i, o, f))
                })
                .collect();
            Ok(DiffReport {
                spectrum_oracle: oracle,
                agree: Some(mismatches.is_empty()),
                spectrum_formula: Some(formula),
                mismatches,
                formula_note: None,
            })
        }
        Err(e @ (nh::NHError::Unsupported | nh::NHError::GatedCharacteristic3)) => {
            Ok(DiffReport {
                spectrum_oracle: oracle,
                spectrum_formula: None,
                agree: None,
                mismatches: vec![],
                formula_note: Some(e.to_string()),
            })
        }
        Err(e) => Err(e),
    }
}
