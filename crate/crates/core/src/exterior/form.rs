use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::symbolic::{Chart, Coord, EvalError, Expr, Valuation};

/// Sorts `coords` in place, returning the permutation sign, or `None` when a
/// coordinate repeats (the wedge product vanishes).
fn sort_with_sign(coords: &mut [Coord]) -> Option<f64> {
    let mut sign = 1.0;
    // insertion sort: every adjacent swap flips the sign
    for i in 1..coords.len() {
        let mut j = i;
        while j > 0 && coords[j - 1] > coords[j] {
            coords.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if coords.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// A vector field `sum_j c_j d/dxi_j` with expression coefficients.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct VectorField {
    components: BTreeMap<Coord, Expr>,
}

impl VectorField {
    pub fn zero() -> VectorField {
        VectorField::default()
    }

    /// The coordinate field `d/dxi`.
    pub fn basis(c: Coord) -> VectorField {
        VectorField::zero().with(c, Expr::one())
    }

    /// Adds `coef * d/dxi` to the field.
    pub fn with(mut self, c: Coord, coef: Expr) -> VectorField {
        self.add_component(c, coef);
        self
    }

    pub fn add_component(&mut self, c: Coord, coef: Expr) {
        let sum = match self.components.remove(&c) {
            Some(old) => old + coef,
            None => coef,
        };
        if !sum.is_zero() {
            self.components.insert(c, sum);
        }
    }

    pub fn component(&self, c: Coord) -> Expr {
        self.components.get(&c).cloned().unwrap_or_else(Expr::zero)
    }

    pub fn components(&self) -> impl Iterator<Item = (Coord, &Expr)> {
        self.components.iter().map(|(c, e)| (*c, e))
    }

    pub fn map_coefficients(&self, f: impl Fn(&Expr) -> Expr) -> VectorField {
        let mut out = VectorField::zero();
        for (c, e) in &self.components {
            out.add_component(*c, f(e));
        }
        out
    }
}

/// A differential form with expression coefficients over one global chart.
///
/// Keys are strictly ascending coordinate tuples naming the basis element
/// `dxi_{i1} ^ ... ^ dxi_{ik}`; absent keys are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    degree: usize,
    terms: BTreeMap<Vec<Coord>, Expr>,
}

impl Form {
    pub fn zero(degree: usize) -> Form {
        Form { degree, terms: BTreeMap::new() }
    }

    /// The 0-form `f`.
    pub fn function(f: Expr) -> Form {
        Form::zero(0).plus_term(vec![], f)
    }

    /// `dxi`.
    pub fn d(c: Coord) -> Form {
        Form::zero(1).plus_term(vec![c], Expr::one())
    }

    /// `coef * dxi_{c1} ^ ... ^ dxi_{ck}` for coordinates in any order.
    pub fn monomial(coef: Expr, coords: &[Coord]) -> Form {
        Form::zero(coords.len()).plus_term(coords.to_vec(), coef)
    }

    /// The volume form `d^m x = dx1 ^ ... ^ dxm`.
    pub fn volume(chart: &Chart) -> Form {
        let coords: Vec<Coord> = chart.base_coords().collect();
        Form::monomial(Expr::one(), &coords)
    }

    /// `d^{m-1}x_alpha = (-1)^alpha dx1 ^ .. (dx_alpha omitted) .. ^ dxm`,
    /// with zero-based `alpha`; agrees with `i(d/dx_alpha) d^m x`.
    pub fn volume_minus(chart: &Chart, alpha: usize) -> Form {
        let coords: Vec<Coord> = chart.base_coords().filter(|c| c.index() != alpha).collect();
        let sign = if alpha % 2 == 0 { 1.0 } else { -1.0 };
        Form::monomial(Expr::constant(sign), &coords)
    }

    /// `df = sum_j (df/dxi_j) dxi_j`.
    pub fn differential(f: &Expr, chart: &Chart) -> Form {
        let mut out = Form::zero(1);
        for c in f.coords() {
            debug_assert!(chart.contains(c));
            out = out.plus_term(vec![c], f.diff(c));
        }
        out
    }

    fn plus_term(mut self, mut coords: Vec<Coord>, coef: Expr) -> Form {
        debug_assert_eq!(coords.len(), self.degree);
        if coef.is_zero() {
            return self;
        }
        let Some(sign) = sort_with_sign(&mut coords) else {
            return self;
        };
        let coef = if sign < 0.0 { -coef } else { coef };
        let sum = match self.terms.remove(&coords) {
            Some(old) => old + coef,
            None => coef,
        };
        if !sum.is_zero() {
            self.terms.insert(coords, sum);
        }
        self
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Coord], &Expr)> {
        self.terms.iter().map(|(k, e)| (k.as_slice(), e))
    }

    /// Coefficient of the basis element named by `coords` (any order; the
    /// permutation sign is applied).
    pub fn coefficient(&self, coords: &[Coord]) -> Expr {
        let mut key = coords.to_vec();
        match sort_with_sign(&mut key) {
            None => Expr::zero(),
            Some(sign) => {
                let c = self.terms.get(&key).cloned().unwrap_or_else(Expr::zero);
                if sign < 0.0 {
                    -c
                } else {
                    c
                }
            }
        }
    }

    pub fn add(&self, other: &Form) -> Form {
        assert_eq!(self.degree, other.degree, "adding forms of different degree");
        let mut out = self.clone();
        for (k, e) in &other.terms {
            out = out.plus_term(k.clone(), e.clone());
        }
        out
    }

    pub fn sub(&self, other: &Form) -> Form {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Form {
        self.scale(&Expr::constant(-1.0))
    }

    /// Multiplies every coefficient by the function `f`.
    pub fn scale(&self, f: &Expr) -> Form {
        let mut out = Form::zero(self.degree);
        for (k, e) in &self.terms {
            out = out.plus_term(k.clone(), f * e);
        }
        out
    }

    pub fn map_coefficients(&self, f: impl Fn(&Expr) -> Expr) -> Form {
        let mut out = Form::zero(self.degree);
        for (k, e) in &self.terms {
            out = out.plus_term(k.clone(), f(e));
        }
        out
    }

    /// Graded wedge product. Exceeding the chart dimension is an error.
    pub fn wedge(&self, other: &Form, chart: &Chart) -> Result<Form> {
        let degree = self.degree + other.degree;
        if degree > chart.dim() {
            return Err(Error::DegreeOverflow { degree, dim: chart.dim() });
        }
        let mut out = Form::zero(degree);
        for (ka, ea) in &self.terms {
            for (kb, eb) in &other.terms {
                let mut key = ka.clone();
                key.extend_from_slice(kb);
                out = out.plus_term(key, ea * eb);
            }
        }
        Ok(out)
    }

    /// Exterior derivative `d(c dxi_I) = sum_j (dc/dxi_j) dxi_j ^ dxi_I`.
    pub fn ext_d(&self) -> Form {
        let mut out = Form::zero(self.degree + 1);
        for (k, e) in &self.terms {
            for c in e.coords() {
                let mut key = Vec::with_capacity(k.len() + 1);
                key.push(c);
                key.extend_from_slice(k);
                out = out.plus_term(key, e.diff(c));
            }
        }
        out
    }

    /// Interior product `i(v) a`.
    ///
    /// Sign convention: `i(d/dxi_j)(dxi_{i1} ^ .. ^ dxi_{ik})` is
    /// `(-1)^(r-1)` times the product with the r-th factor removed when
    /// `j = i_r` (1-based `r`), and zero otherwise.
    pub fn contract(&self, v: &VectorField) -> Result<Form> {
        if self.degree == 0 {
            return Err(Error::DegreeUnderflow { needed: 1, got: 0 });
        }
        let mut out = Form::zero(self.degree - 1);
        for (k, e) in &self.terms {
            for (r, c) in k.iter().enumerate() {
                let vc = v.component(*c);
                if vc.is_zero() {
                    continue;
                }
                let mut key = k.clone();
                key.remove(r);
                let coef = if r % 2 == 0 { &vc * e } else { -(&vc * e) };
                out = out.plus_term(key, coef);
            }
        }
        Ok(out)
    }

    /// Pullback along the map that replaces each coordinate `c` in `map` by
    /// `map[c]` (coordinates not in `map` are left fixed): coefficients are
    /// substituted and `dxi` becomes `d(map[xi])`.
    pub fn pullback(&self, map: &BTreeMap<Coord, Expr>, chart: &Chart) -> Result<Form> {
        let subst = |c: Coord| map.get(&c).cloned();
        let mut out = Form::zero(self.degree);
        for (k, e) in &self.terms {
            let mut piece = Form::function(e.substitute(&subst));
            for c in k {
                let image_d = match map.get(c) {
                    Some(image) => Form::differential(image, chart),
                    None => Form::d(*c),
                };
                piece = piece.wedge(&image_d, chart)?;
            }
            out = out.add(&piece);
        }
        Ok(out)
    }

    /// Numeric coefficients at a point.
    pub fn eval<V: Valuation + ?Sized>(&self, env: &V) -> Result<NumForm, EvalError> {
        let mut terms = BTreeMap::new();
        for (k, e) in &self.terms {
            let value = e.eval(env)?;
            if value != 0.0 {
                terms.insert(k.clone(), value);
            }
        }
        Ok(NumForm { degree: self.degree, terms })
    }

    /// Human-readable listing `coef * dxi ^ ...` using chart names.
    pub fn display(&self, chart: &Chart) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(k, e)| {
                let basis: Vec<String> =
                    k.iter().map(|c| format!("d{}", chart.name(*c))).collect();
                if basis.is_empty() {
                    format!("{}", e.display(chart))
                } else {
                    format!("({}) {}", e.display(chart), basis.join("^"))
                }
            })
            .collect();
        parts.join(" + ")
    }
}

/// A form evaluated at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct NumForm {
    degree: usize,
    terms: BTreeMap<Vec<Coord>, f64>,
}

impl NumForm {
    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coefficient(&self, coords: &[Coord]) -> f64 {
        let mut key = coords.to_vec();
        match sort_with_sign(&mut key) {
            None => 0.0,
            Some(sign) => sign * self.terms.get(&key).copied().unwrap_or(0.0),
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Coord], f64)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), *v))
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest coefficient-wise difference over the union of keys.
    pub fn max_abs_diff(&self, other: &NumForm) -> f64 {
        let mut worst: f64 = if self.degree == other.degree { 0.0 } else { f64::INFINITY };
        for (k, v) in &self.terms {
            worst = worst.max((v - other.terms.get(k).copied().unwrap_or(0.0)).abs());
        }
        for (k, v) in &other.terms {
            if !self.terms.contains_key(k) {
                worst = worst.max(v.abs());
            }
        }
        worst
    }
}

/// A decomposable multivector `f V_1 ^ ... ^ V_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiVector {
    pub factor: Expr,
    pub legs: Vec<VectorField>,
}

impl MultiVector {
    pub fn new(factor: Expr, legs: Vec<VectorField>) -> MultiVector {
        MultiVector { factor, legs }
    }

    pub fn order(&self) -> usize {
        self.legs.len()
    }

    /// `i(f V_1 ^ ... ^ V_m) a = f i(V_m) ... i(V_1) a`.
    pub fn contract(&self, a: &Form) -> Result<Form> {
        if a.degree() < self.legs.len() {
            return Err(Error::DegreeUnderflow { needed: self.legs.len(), got: a.degree() });
        }
        let mut out = a.clone();
        for leg in &self.legs {
            out = out.contract(leg)?;
        }
        Ok(out.scale(&self.factor))
    }

    /// Checks at `env` that leg `alpha` has `d/dx^beta` coefficient
    /// `delta_{alpha beta}` (transversality in normalized form) and that the
    /// factor is non-zero.
    pub fn is_normalized_transverse<V: Valuation + ?Sized>(
        &self,
        chart: &Chart,
        env: &V,
        tol: f64,
    ) -> Result<bool, EvalError> {
        if self.legs.len() != chart.m() || self.factor.eval(env)?.abs() <= tol {
            return Ok(false);
        }
        for (alpha, leg) in self.legs.iter().enumerate() {
            for beta in 0..chart.m() {
                let want = if alpha == beta { 1.0 } else { 0.0 };
                if (leg.component(chart.x(beta)).eval(env)? - want).abs() > tol {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

/// `i(v) a` as a free function; see [`Form::contract`].
pub fn contract(v: &VectorField, a: &Form) -> Result<Form> {
    a.contract(v)
}

/// `i(X) a`; see [`MultiVector::contract`].
pub fn contract_multi(x: &MultiVector, a: &Form) -> Result<Form> {
    x.contract(a)
}

/// Pulls `a` back along a section given by expressions in the base
/// coordinates for every fiber coordinate `a` mentions.
pub fn pullback_section(a: &Form, section: &BTreeMap<Coord, Expr>, chart: &Chart) -> Result<Form> {
    for expr in section.values() {
        if let Some(c) = expr.coords().into_iter().find(|c| !chart.is_base(*c)) {
            return Err(Error::Dimension(format!(
                "section component depends on non-base coordinate `{}`",
                chart.name(c)
            )));
        }
    }
    for (k, e) in a.terms() {
        let needed = k.iter().copied().chain(e.coords());
        for c in needed {
            if !chart.is_base(c) && !section.contains_key(&c) {
                return Err(Error::MissingSectionComponent(chart.name(c).to_string()));
            }
        }
    }
    a.pullback(section, chart)
}
