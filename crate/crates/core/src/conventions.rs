//! Normalizations every reported number depends on.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Conventions {
    pub intrinsic_volumes: String,
    #[serde(rename = "dU")]
    pub du: String,
    #[serde(rename = "dE")]
    pub de: String,
    pub kinematic_constants: String,
}

impl Default for Conventions {
    fn default() -> Self {
        Conventions {
            intrinsic_volumes: "V_i = C(n,i)^-1 * omega_{n-i} * V_i(classical), so V_i(unit ball) = omega_n and V_n = vol"
                .into(),
            du: "Haar probability on the rotation group (SO(n) or U(m)) times Lebesgue measure on translations".into(),
            de: "Haar probability on complex (m-p)-planes through the origin times Lebesgue measure on the real 2p-dimensional orthogonal complement"
                .into(),
            kinematic_constants: "integral of chi(K1 ∩ gK2) dg = sum kappa * V or U values of K1 times those of K2".into(),
        }
    }
}
