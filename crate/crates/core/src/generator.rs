//! The infinitesimal generator
//! `𝒜f = Σᵢ bᵢ ∂ᵢf + ½ Σᵢⱼ (σσᵀ)ᵢⱼ ∂ᵢ∂ⱼf` applied symbolically to monomials.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::model::SdeModel;
use crate::poly::{Monomial, Polynomial, Rational};

/// `𝒜(x^β) = Σ_γ a_βγ x^γ + c_β`, with the constant split out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorImage {
    /// Coefficients `a_βγ` for non-constant `γ`; never holds zeros.
    pub linear_part: BTreeMap<Monomial, Rational>,
    /// The constant `c_β`.
    pub constant: Rational,
}

impl GeneratorImage {
    fn from_polynomial(p: Polynomial) -> Self {
        let mut linear_part = BTreeMap::new();
        let mut constant = Rational::zero();
        for (m, c) in p.terms() {
            if m.is_one() {
                constant = c.clone();
            } else {
                linear_part.insert(m.clone(), c.clone());
            }
        }
        GeneratorImage { linear_part, constant }
    }

    pub fn to_polynomial(&self, dim: usize) -> Polynomial {
        let constant = std::iter::once((Monomial::one(dim), self.constant.clone()));
        let terms = self.linear_part.iter().map(|(m, c)| (m.clone(), c.clone())).chain(constant);
        Polynomial::from_terms(dim, terms).expect("image terms share the model dimension")
    }
}

/// `(σσᵀ)ᵢⱼ = Σₖ σᵢₖ σⱼₖ`, symmetric `n × n`.
pub fn diffusion_product(model: &SdeModel) -> Vec<Vec<Polynomial>> {
    let n = model.dim();
    let sigma = model.diffusion();
    let mut out = vec![vec![Polynomial::zero(n); n]; n];
    for i in 0..n {
        for j in i..n {
            let mut acc = Polynomial::zero(n);
            for k in 0..model.brownian_dim() {
                let prod = sigma[i][k].mul(&sigma[j][k]).expect("model dimensions agree");
                acc = acc.add(&prod).expect("model dimensions agree");
            }
            out[j][i] = acc.clone();
            out[i][j] = acc;
        }
    }
    out
}

/// Generator bound to one model, caching `σσᵀ` across applications.
#[derive(Debug, Clone)]
pub struct Generator<'m> {
    model: &'m SdeModel,
    sigma_sq: Vec<Vec<Polynomial>>,
}

impl<'m> Generator<'m> {
    pub fn new(model: &'m SdeModel) -> Self {
        Generator { model, sigma_sq: diffusion_product(model) }
    }

    pub fn model(&self) -> &'m SdeModel {
        self.model
    }

    pub fn diffusion_product(&self) -> &[Vec<Polynomial>] {
        &self.sigma_sq
    }

    /// `𝒜(x^β)` as a polynomial.
    pub fn apply_monomial(&self, beta: &Monomial) -> Polynomial {
        let n = self.model.dim();
        assert_eq!(beta.dim(), n, "monomial dimension must match the model");
        let mut out = Polynomial::zero(n);
        let drift = self.model.drift();
        for i in 0..n {
            let Some(lowered) = beta.div_var(i) else { continue };
            let k = Rational::from_integer(beta.exponent(i).into());
            for (m, c) in drift[i].terms() {
                out.add_term(m.mul(&lowered), c * &k);
            }
        }
        let half = Rational::new(1.into(), 2.into());
        // Full ordered double sum; symmetric entries are visited twice.
        for i in 0..n {
            let Some(di) = beta.div_var(i) else { continue };
            let bi = beta.exponent(i);
            for j in 0..n {
                let entry = &self.sigma_sq[i][j];
                if entry.is_zero() {
                    continue;
                }
                let Some(dij) = di.div_var(j) else { continue };
                let mult = if i == j { bi * (bi - 1) } else { bi * beta.exponent(j) };
                let k = Rational::from_integer(mult.into()) * &half;
                for (m, c) in entry.terms() {
                    out.add_term(m.mul(&dij), c * &k);
                }
            }
        }
        out
    }

    pub fn apply(&self, beta: &Monomial) -> GeneratorImage {
        GeneratorImage::from_polynomial(self.apply_monomial(beta))
    }

    /// `𝒜p` for a polynomial `p`, extending by linearity.
    pub fn apply_polynomial(&self, p: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.model.dim());
        for (m, c) in p.terms() {
            for (g, a) in self.apply_monomial(m).terms() {
                out.add_term(g.clone(), a * c);
            }
        }
        out
    }
}

/// One-shot form of [`Generator::apply`].
pub fn apply_generator(model: &SdeModel, beta: &Monomial) -> GeneratorImage {
    Generator::new(model).apply(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::corpus;
    use crate::poly::rational::int;

    fn image(pairs: &[(&[u32], i64)]) -> BTreeMap<Monomial, Rational> {
        pairs.iter().map(|(e, c)| (Monomial::new(e.to_vec()), int(*c))).collect()
    }

    #[test]
    fn ou_env_diffusion_product() {
        let m = corpus::load("ou-env").unwrap();
        let s = diffusion_product(&m);
        assert_eq!(s[0][0], Polynomial::one(2));
        assert!(s[0][1].is_zero() && s[1][0].is_zero());
        assert_eq!(s[1][1], m.parse("x1^2").unwrap());
    }

    #[test]
    fn consensus_diffusion_product_is_diagonal_squares() {
        let m = corpus::load("consensus").unwrap();
        let s = diffusion_product(&m);
        assert_eq!(s[0][0], m.parse("x1*x1").unwrap());
        assert_eq!(s[1][1], m.parse("x2*x2").unwrap());
        assert!(s[0][1].is_zero());
    }

    #[test]
    fn zero_diffusion_gives_zero_product() {
        let src = r#"{"name":"ode","variables":["x","y"],"brownian_dim":1,
            "drift":["-x","x - y"],"diffusion":[["0"],["0"]],
            "initial":{"kind":"point","values":["1","0"]}}"#;
        let m = SdeModel::from_json(src).unwrap();
        assert!(diffusion_product(&m).iter().flatten().all(Polynomial::is_zero));
    }

    #[test]
    fn ou_env_images_match_moment_equations() {
        let m = corpus::load("ou-env").unwrap();
        let g = Generator::new(&m);
        let img = g.apply(&Monomial::from([0, 2]));
        assert_eq!(img.linear_part, image(&[(&[0, 2], -4), (&[2, 1], 2), (&[2, 0], 1), (&[1, 1], 2)]));
        assert_eq!(img.constant, int(0));

        let img = g.apply(&Monomial::from([2, 0]));
        assert_eq!(img.linear_part, image(&[(&[2, 0], -2)]));
        assert_eq!(img.constant, int(1));

        let img = g.apply(&Monomial::from([0, 0]));
        assert!(img.linear_part.is_empty());
        assert_eq!(img.constant, int(0));
    }

    #[test]
    fn double_well_raises_degree_by_two() {
        let m = corpus::load("double-well").unwrap();
        let g = Generator::new(&m);
        for n in 1..12u32 {
            let img = g.apply(&Monomial::from([n]));
            assert_eq!(img.linear_part.get(&Monomial::from([n + 2])), Some(&int(-(n as i64))));
        }
    }
}
