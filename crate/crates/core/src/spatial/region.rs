use super::{BoundaryKind, BoundarySpec, DomainOperator, FaceFluxSet, SpatialError};
use crate::coupling::{
    bulk_coefficients, exchange_interface_data, interface_fluxes, BulkCoefficients, CouplingError,
    InterfaceFluxes, InterfaceSide,
};
use crate::domain::{CoupledDomain, Region};
use crate::integrator::RhsEvalLedger;
use crate::physics::{Axis, Conserved, FluidParams};

/// Stage states a region evaluation may read.
///
/// `omega2` is a full Ω₂ array: buffer layers hold the buffer stage state and
/// slow layers the slow stage state, so faces on the buffer/slow seam see
/// the neighbour's current stage values.
#[derive(Debug, Clone, Copy)]
pub struct StageInputs<'a> {
    pub omega1: &'a [Conserved],
    pub omega2: &'a [Conserved],
    pub interface: Option<&'a [Conserved]>,
}

/// Both subdomains, their fluids and boundary conditions.
#[derive(Debug, Clone)]
pub struct CoupledSystem {
    pub domain: CoupledDomain,
    pub params1: FluidParams,
    pub params2: FluidParams,
    pub bcs1: BoundarySpec,
    pub bcs2: BoundarySpec,
    coeffs: BulkCoefficients,
}

impl CoupledSystem {
    /// `bcs1` must have an interface on top, `bcs2` at the bottom.
    pub fn new(
        domain: CoupledDomain,
        params1: FluidParams,
        params2: FluidParams,
        bcs1: BoundarySpec,
        bcs2: BoundarySpec,
    ) -> Result<Self, SpatialError> {
        if bcs1.kind(Axis::Z, super::Side::Hi) != BoundaryKind::Interface
            || bcs2.kind(Axis::Z, super::Side::Lo) != BoundaryKind::Interface
        {
            return Err(SpatialError::Boundary(
                "the lower domain needs an interface on top and the upper one at the bottom".into(),
            ));
        }
        if bcs1.kind(Axis::Z, super::Side::Lo) == BoundaryKind::Interface
            || bcs2.kind(Axis::Z, super::Side::Hi) == BoundaryKind::Interface
        {
            return Err(SpatialError::Boundary("only one interface plane is supported".into()));
        }
        if params1.gamma != params2.gamma {
            return Err(SpatialError::Boundary("both fluids must share gamma".into()));
        }
        let coeffs = bulk_coefficients(
            params1.mu,
            params2.mu,
            params1.kappa(),
            params2.kappa(),
            domain.grid1.dz(),
            domain.grid2.dz(),
        );
        Ok(Self { domain, params1, params2, bcs1, bcs2, coeffs })
    }

    pub fn gamma(&self) -> f64 {
        self.params1.gamma
    }

    pub fn coefficients(&self) -> &BulkCoefficients {
        &self.coeffs
    }

    pub fn lower_side(&self) -> InterfaceSide {
        InterfaceSide { mu: self.params1.mu, kappa: self.params1.kappa(), dz: self.domain.grid1.dz() }
    }

    pub fn upper_side(&self) -> InterfaceSide {
        InterfaceSide { mu: self.params2.mu, kappa: self.params2.kappa(), dz: self.domain.grid2.dz() }
    }

    pub fn operator1(&self) -> DomainOperator<'_> {
        DomainOperator::new(&self.domain.grid1, &self.params1, &self.bcs1)
    }

    pub fn operator2(&self) -> DomainOperator<'_> {
        DomainOperator::new(&self.domain.grid2, &self.params2, &self.bcs2)
    }

    /// Exchanges interface samples of stage `stage` on both sides and
    /// returns the shared interface fluxes.
    pub fn exchange(
        &self,
        stage_fast: usize,
        omega1: &[Conserved],
        stage_buffer: usize,
        omega2: &[Conserved],
    ) -> Result<InterfaceFluxes, CouplingError> {
        let g1 = &self.domain.grid1;
        let g2 = &self.domain.grid2;
        let top = &omega1[g1.layer_span(g1.nz - 1..g1.nz)];
        let bottom = &omega2[g2.layer_span(0..1)];
        let data = exchange_interface_data(stage_fast, top, stage_buffer, bottom, self.gamma(), g1.is_3d())?;
        Ok(interface_fluxes(&data, &self.coeffs, &self.lower_side(), &self.upper_side()))
    }

    /// Elements of `region`.
    pub fn region_len(&self, region: Region) -> usize {
        match region {
            Region::Fast => self.domain.grid1.len(),
            r => self.domain.grid2.layer_len() * self.domain.partition.layers(r).len(),
        }
    }

    /// Tendencies `R^z` of the elements of `region`, written to `out`.
    /// Returns the faces bounding the region.
    pub fn rhs_region(
        &self,
        region: Region,
        inputs: &StageInputs<'_>,
        out: &mut [Conserved],
        ledger: &mut RhsEvalLedger,
    ) -> Result<FaceFluxSet, SpatialError> {
        let faces = match region {
            Region::Fast => {
                let g = &self.domain.grid1;
                self.operator1().evaluate(inputs.omega1, inputs.interface, 0..g.nz, out)?
            }
            r => {
                let layers = self.domain.partition.layers(r);
                self.operator2().evaluate(inputs.omega2, inputs.interface, layers, out)?
            }
        };
        ledger.record(region, self.region_len(region) as u64);
        Ok(faces)
    }

    /// Tendencies of both complete subdomains (no region split).
    pub fn rhs_monolithic(
        &self,
        omega1: &[Conserved],
        omega2: &[Conserved],
        interface: &[Conserved],
        out1: &mut [Conserved],
        out2: &mut [Conserved],
    ) -> Result<(FaceFluxSet, FaceFluxSet), SpatialError> {
        let f1 = self.operator1().evaluate(omega1, Some(interface), 0..self.domain.grid1.nz, out1)?;
        let f2 = self.operator2().evaluate(omega2, Some(interface), 0..self.domain.grid2.nz, out2)?;
        Ok((f1, f2))
    }
}
