use crate::cim::CrossbarArray;
use crate::error::{Error, Result};
use crate::graph::IsingModel;

/// Where the coupling product `J x` is evaluated.
pub trait VmmBackend: Sync {
    fn n(&self) -> usize;

    /// `J x` for real `x`.
    fn mul_real(&self, x: &[f64], out: &mut [f64]) -> Result<()>;

    /// `J x` for `x` with entries in {-1, 0, 1}.
    fn mul_ternary(&self, x: &[i8], out: &mut [i64]) -> Result<()>;
}

impl VmmBackend for IsingModel {
    fn n(&self) -> usize {
        IsingModel::n(self)
    }

    fn mul_real(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.n(), x.len())?;
        IsingModel::mul_real(self, x, out);
        Ok(())
    }

    fn mul_ternary(&self, x: &[i8], out: &mut [i64]) -> Result<()> {
        check_len(self.n(), x.len())?;
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).map(|(c, v)| v * x[c] as i64).sum();
        }
        Ok(())
    }
}

impl VmmBackend for CrossbarArray {
    fn n(&self) -> usize {
        self.rows()
    }

    fn mul_real(&self, _x: &[f64], _out: &mut [f64]) -> Result<()> {
        Err(Error::InvalidConfig(
            "the crossbar backend only accepts ternary inputs".into(),
        ))
    }

    fn mul_ternary(&self, x: &[i8], out: &mut [i64]) -> Result<()> {
        let v = self.vmm_ternary(x)?;
        out.copy_from_slice(&v);
        Ok(())
    }
}

/// Evaluates `-J x` on the wrapped backend.
pub struct Negated<'a, B: ?Sized>(pub &'a B);

impl<B: VmmBackend + ?Sized> VmmBackend for Negated<'_, B> {
    fn n(&self) -> usize {
        self.0.n()
    }

    fn mul_real(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.0.mul_real(x, out)?;
        out.iter_mut().for_each(|v| *v = -*v);
        Ok(())
    }

    fn mul_ternary(&self, x: &[i8], out: &mut [i64]) -> Result<()> {
        self.0.mul_ternary(x, out)?;
        out.iter_mut().for_each(|v| *v = -*v);
        Ok(())
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}
