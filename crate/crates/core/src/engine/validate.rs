//! Three-way cross-validation of a type witness.

use alloc::format;
use alloc::vec::Vec;

use num_traits::Zero;

use crate::disks::contact_order;
use crate::geometry::{field_jet, ACStructure, Hypersurface};
use crate::levi::higher_levi_all;
use crate::{Error, Result};

use super::commute::commutation_defect;
use super::realize::{disk_field_target, realize_field_from_disk};
use super::search::TypeReport;

/// Which of the four equivalent properties of a contact-`(k+2)` witness hold.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationRecord {
    pub k: u32,
    /// A complex tangent field realizes the disk's derivative jet to order `k`.
    pub field_realized: bool,
    /// Brackets of the realized field vanish to order `k + 1`.
    pub brackets_vanish: bool,
    pub bracket_order: u32,
    /// `L^{p,q}` vanishes on the witness x-jet for `p + q <= k - 1`.
    pub levi_vanish: bool,
    /// `X^m(0)` equals `∂^m u/∂x^m (0)` for `m <= k + 1`.
    pub derivatives_match: bool,
}

impl ValidationRecord {
    pub fn passed(&self) -> bool {
        self.field_realized && self.brackets_vanish && self.levi_vanish && self.derivatives_match
    }
}

/// Runs all four checks on the witness disk of `report`, with
/// `k = lower_bound - 2`. Any failed check is an error.
pub fn cross_validate(m: &Hypersurface, j: &ACStructure, report: &TypeReport) -> Result<ValidationRecord> {
    let witness = report
        .witness_disk
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("report carries no witness disk".into()))?;
    let k = report.lower_bound - 2;
    let u = witness.truncated(k + 1);
    let contact = contact_order(m, &u)?;
    if !contact.is_at_least(k + 2) {
        return Err(Error::InsufficientContact {
            found: contact.lower_bound(),
            needed: k + 2,
        });
    }

    let x = realize_field_from_disk(m, j, &u, k)?;
    let jet = field_jet(&x, j, k)?;
    let field_realized = jet == disk_field_target(&u, k)?;

    let commutation = commutation_defect(&x, j, k + 1)?;
    let brackets_vanish = commutation.commutes_to(k + 1);

    let x_jet: Vec<_> = u.x_jet();
    let levi_vanish = k == 0
        || higher_levi_all(m, j, &x_jet, k - 1)?
            .iter()
            .flatten()
            .all(Zero::is_zero);

    let derivatives_match = (1..=k + 1).all(|mm| jet.get(mm - 1, 0) == Some(x_jet[mm as usize - 1].as_slice()));

    let record = ValidationRecord {
        k,
        field_realized,
        brackets_vanish,
        bracket_order: commutation.max_vanishing_order,
        levi_vanish,
        derivatives_match,
    };
    if !record.passed() {
        return Err(Error::TheoremViolation(format!("{record:?}")));
    }
    Ok(record)
}
