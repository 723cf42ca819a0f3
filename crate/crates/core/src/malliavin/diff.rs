use crate::error::Result;
use crate::functionals::FunctionalSpec;
use crate::point_process::{Point, PointConfiguration};

/// `D_x F = f(η + δ_x) − f(η)`.
pub fn diff1(functional: &FunctionalSpec, base: &PointConfiguration, x: &Point) -> Result<f64> {
    let plus = base.add_points(std::slice::from_ref(x))?;
    Ok(functional.eval(&plus) - functional.eval(base))
}

/// `D²_{x₁,x₂} F = f(η+δ₁+δ₂) − f(η+δ₁) − f(η+δ₂) + f(η)`.
pub fn diff2(functional: &FunctionalSpec, base: &PointConfiguration, x1: &Point, x2: &Point) -> Result<f64> {
    base.check_point(x1)?;
    base.check_point(x2)?;
    let p1 = base.add_points(std::slice::from_ref(x1))?;
    let p2 = base.add_points(std::slice::from_ref(x2))?;
    let p21 = p2.add_points(std::slice::from_ref(x1))?;
    let f0 = functional.eval(base);
    // grouped as D_{x1}F(η+δ_{x2}) − D_{x1}F(η)
    Ok((functional.eval(&p21) - functional.eval(&p2)) - (functional.eval(&p1) - f0))
}
