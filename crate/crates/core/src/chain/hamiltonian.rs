use super::basis::{sigma_z, SpinBasis, MAX_SPARSE_SITES};
use super::operator::SparseOperator;
use super::ChainError;
use crate::work::QuenchParam;

/// Pinning field at site 0; negative selects the all-up ferromagnet.
pub const DEFAULT_PIN: f64 = -1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

impl Boundary {
    pub fn label(self) -> &'static str {
        match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "open" => Some(Boundary::Open),
            "periodic" | "pbc" => Some(Boundary::Periodic),
            _ => None,
        }
    }
}

/// Open or periodic XYZ chain
/// `H = Σ_⟨i,j⟩ [Jx σxσx + Jy σyσy + (λ/2) σzσz] + h Σ_i σz_i + pin σz_pin`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec {
    pub n_sites: usize,
    pub jx: f64,
    pub jy: f64,
    pub lambda_z: f64,
    pub field_h: f64,
    pub pin_strength: f64,
    pub pin_site: usize,
    pub boundary: Boundary,
}

impl Default for ChainSpec {
    fn default() -> Self {
        Self {
            n_sites: 2,
            jx: 1.0,
            jy: 1.0,
            lambda_z: 0.0,
            field_h: 0.0,
            pin_strength: DEFAULT_PIN,
            pin_site: 0,
            boundary: Boundary::Open,
        }
    }
}

/// One nearest-neighbour bond; `scale` multiplies all three couplings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub scale: f64,
}

impl ChainSpec {
    /// XXZ chain at zero field with the default pin.
    pub fn xxz(n_sites: usize, j: f64, lambda_z: f64) -> Self {
        Self {
            n_sites,
            jx: j,
            jy: j,
            lambda_z,
            ..Self::default()
        }
    }

    /// XX chain in a field, unpinned.
    pub fn xx(n_sites: usize, j: f64, field_h: f64) -> Self {
        Self {
            n_sites,
            jx: j,
            jy: j,
            field_h,
            pin_strength: 0.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ChainError> {
        if self.n_sites < 2 {
            return Err(ChainError::TooShort(self.n_sites));
        }
        if self.n_sites > MAX_SPARSE_SITES {
            return Err(ChainError::SiteCount(self.n_sites));
        }
        if self.pin_site >= self.n_sites {
            return Err(ChainError::PinSite {
                pin_site: self.pin_site,
                n_sites: self.n_sites,
            });
        }
        for (name, v) in [
            ("jx", self.jx),
            ("jy", self.jy),
            ("lambda_z", self.lambda_z),
            ("field_h", self.field_h),
            ("pin_strength", self.pin_strength),
        ] {
            if !v.is_finite() {
                return Err(ChainError::NonFinite(name));
            }
        }
        Ok(())
    }

    /// `σxσx + σyσy` conserves `Σσz` only for equal couplings.
    pub fn conserves_magnetization(&self) -> bool {
        self.jx == self.jy
    }

    pub fn bonds(&self) -> Vec<Bond> {
        let n = self.n_sites;
        let mut bonds: Vec<Bond> = (0..n - 1)
            .map(|a| Bond {
                a,
                b: a + 1,
                scale: 1.0,
            })
            .collect();
        if self.boundary == Boundary::Periodic {
            bonds.push(Bond {
                a: n - 1,
                b: 0,
                scale: 1.0,
            });
        }
        bonds
    }

    pub fn param(&self, param: QuenchParam) -> f64 {
        match param {
            QuenchParam::LambdaZ => self.lambda_z,
            QuenchParam::FieldH => self.field_h,
        }
    }

    pub fn with_param(&self, param: QuenchParam, value: f64) -> Self {
        let mut s = *self;
        match param {
            QuenchParam::LambdaZ => s.lambda_z = value,
            QuenchParam::FieldH => s.field_h = value,
        }
        s
    }
}

fn check_compatible(spec: &ChainSpec, basis: &SpinBasis) -> Result<(), ChainError> {
    spec.validate()?;
    if basis.n_sites() != spec.n_sites {
        return Err(ChainError::BasisMismatch {
            basis: basis.n_sites(),
            chain: spec.n_sites,
        });
    }
    if basis.sector().is_some() && !spec.conserves_magnetization() {
        return Err(ChainError::SectorNeedsXxSymmetry {
            jx: spec.jx,
            jy: spec.jy,
        });
    }
    Ok(())
}

pub fn build_hamiltonian(spec: &ChainSpec, basis: &SpinBasis) -> Result<SparseOperator, ChainError> {
    assemble(spec, basis, &spec.bonds())
}

/// Builds the Hamiltonian over an explicit bond list.
pub fn assemble(spec: &ChainSpec, basis: &SpinBasis, bonds: &[Bond]) -> Result<SparseOperator, ChainError> {
    check_compatible(spec, basis)?;
    let n = spec.n_sites;
    let mut triplets = Vec::with_capacity(basis.len() * (1 + bonds.len()));
    for (col, &s) in basis.states().iter().enumerate() {
        let mut zz = 0.0;
        for bond in bonds {
            let (za, zb) = (sigma_z(s, bond.a), sigma_z(s, bond.b));
            zz += bond.scale * f64::from(za * zb);
            // σxσx flips both spins with amplitude Jx; σyσy with −Jy on
            // aligned pairs and +Jy on anti-aligned ones.
            let amp = bond.scale * if za != zb { spec.jx + spec.jy } else { spec.jx - spec.jy };
            if amp != 0.0 {
                let t = s ^ (1 << bond.a) ^ (1 << bond.b);
                let row = basis.index_of(t).expect("flip outside the sector despite jx = jy");
                triplets.push((row, col, amp));
            }
        }
        let sz: i32 = (0..n).map(|i| sigma_z(s, i)).sum();
        let diag = 0.5 * spec.lambda_z * zz
            + spec.field_h * f64::from(sz)
            + spec.pin_strength * f64::from(sigma_z(s, spec.pin_site));
        triplets.push((col, col, diag));
    }
    Ok(SparseOperator::from_triplets(basis.len(), triplets))
}

/// Quench generator `V = ∂H/∂param`: `½ Σ σzσz` for the Z coupling,
/// `Σ σz` for the field. Both are diagonal.
pub fn build_potential(spec: &ChainSpec, param: QuenchParam, basis: &SpinBasis) -> Result<SparseOperator, ChainError> {
    check_compatible(spec, basis)?;
    let n = spec.n_sites;
    let bonds = spec.bonds();
    let diag = basis.states().iter().enumerate().map(|(i, &s)| {
        let v = match param {
            QuenchParam::LambdaZ => {
                0.5 * bonds
                    .iter()
                    .map(|b| f64::from(sigma_z(s, b.a) * sigma_z(s, b.b)))
                    .sum::<f64>()
            }
            QuenchParam::FieldH => f64::from((0..n).map(|k| sigma_z(s, k)).sum::<i32>()),
        };
        (i, i, v)
    });
    Ok(SparseOperator::from_triplets(basis.len(), diag))
}
