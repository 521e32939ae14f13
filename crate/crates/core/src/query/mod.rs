//! Queries on exact elements.
//!
//! [`valuation`] and [`are_distinct`] may run out of epochs on elements that
//! are zero or equal; they then fail with [`Error::BudgetExhausted`], carrying
//! the last weak valuation seen. [`valuation_cmp`] always terminates.

use std::cmp::Ordering;

use crate::error::{Error, Result, Val};
use crate::rings::{Context, Elem};

/// Runs `f` with the graph's epoch budget temporarily set to `budget`.
fn with_budget<T>(cx: &mut Context, budget: Option<u32>, f: impl FnOnce(&mut Context, u32) -> Result<T>) -> Result<T> {
    let Some(b) = budget else {
        let m = cx.max_epoch();
        return f(cx, m);
    };
    let saved = cx.max_epoch();
    cx.graph_mut().set_max_epoch(b);
    let m = cx.max_epoch();
    let out = f(cx, m);
    cx.graph_mut().set_max_epoch(saved);
    out
}

fn exhausted(cx: &Context, x: Elem, epoch: u32) -> Error {
    Error::BudgetExhausted { epoch, last_weak_valuation: cx.graph().last_weak_valuation(x.0) }
}

/// Fills in the last weak valuation when a budget error bubbles up from the
/// graph.
fn annotate(cx: &Context, x: Elem, e: Error) -> Error {
    match e {
        Error::BudgetExhausted { epoch, last_weak_valuation: None } => Error::BudgetExhausted {
            epoch,
            last_weak_valuation: cx.graph().last_weak_valuation(x.0),
        },
        e => e,
    }
}

/// The valuation of `x`, in units of the uniformizer of its parent.
pub fn valuation(cx: &mut Context, x: Elem) -> Result<Val> {
    valuation_within(cx, x, None)
}

pub fn valuation_within(cx: &mut Context, x: Elem, budget: Option<u32>) -> Result<Val> {
    with_budget(cx, budget, |cx, max| {
        for n in 1..=max {
            let a = cx.approx_elt(x, n).map_err(|e| annotate(cx, x, e))?;
            if a.valuation_known() {
                return Ok(a.weak_valuation());
            }
        }
        Err(exhausted(cx, x, max))
    })
}

/// Compares `val(x)` with `v`.
pub fn valuation_cmp(cx: &mut Context, x: Elem, v: i64) -> Result<Ordering> {
    valuation_cmp_within(cx, x, v, None)
}

pub fn valuation_cmp_within(cx: &mut Context, x: Elem, v: i64, budget: Option<u32>) -> Result<Ordering> {
    with_budget(cx, budget, |cx, max| {
        for n in 1..=max {
            let a = cx.approx_elt(x, n).map_err(|e| annotate(cx, x, e))?;
            if a.valuation_known() || a.abs_precision() > Val::Finite(v) {
                return Ok(a.weak_valuation().cmp(&Val::Finite(v)));
            }
        }
        Err(exhausted(cx, x, max))
    })
}

pub fn is_weakly_zero_at(cx: &mut Context, x: Elem, n: u32) -> Result<bool> {
    Ok(cx.approx_elt(x, n)?.is_weakly_zero())
}

pub fn weak_valuation_at(cx: &mut Context, x: Elem, n: u32) -> Result<Val> {
    Ok(cx.approx_elt(x, n)?.weak_valuation())
}

pub fn abs_precision_at(cx: &mut Context, x: Elem, n: u32) -> Result<Val> {
    Ok(cx.approx_elt(x, n)?.abs_precision())
}

/// The first epoch at which `x - y` is not weakly zero.
pub fn distinguishing_epoch(cx: &mut Context, x: Elem, y: Elem, budget: Option<u32>) -> Result<u32> {
    let d = cx.sub(x, y)?;
    with_budget(cx, budget, |cx, max| {
        for n in 1..=max {
            if !cx.approx_elt(d, n).map_err(|e| annotate(cx, d, e))?.is_weakly_zero() {
                return Ok(n);
            }
        }
        Err(exhausted(cx, d, max))
    })
}

/// `true` once `x` and `y` are seen to differ. Never returns `false`: equal
/// elements exhaust the budget instead.
pub fn are_distinct(cx: &mut Context, x: Elem, y: Elem) -> Result<bool> {
    distinguishing_epoch(cx, x, y, None).map(|_| true)
}
