//! Shared numerical kernels: Gauss-Legendre quadrature, compensated
//! summation, bracketed bisection, log-log slope fits, and a tangent
//! evaluated with compensated argument reduction.

/// Nodes and weights of the `n`-point Gauss-Legendre rule on [-1, 1].
///
/// Newton iteration on the Legendre recurrence; accurate to machine
/// precision for the small n used here.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 2, "need at least two nodes");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence: (j+1) P_{j+1} = (2j+1) x P_j - j P_{j-1}.
            let mut p0 = 1.0;
            let mut p1 = x;
            for j in 1..n {
                let jf = j as f64;
                let p2 = ((2.0 * jf + 1.0) * x * p1 - jf * p0) / (jf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Integrate `f` over [a, b] with `panels` equal composite panels of the
/// `nodes`-point Gauss-Legendre rule.
pub fn integrate_gl(a: f64, b: f64, panels: usize, nodes: usize, f: impl Fn(f64) -> f64) -> f64 {
    assert!(panels >= 1 && b >= a);
    let (xs, ws) = gauss_legendre(nodes);
    let width = (b - a) / panels as f64;
    let mut total = CompensatedSum::new();
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let mid = lo + 0.5 * width;
        let half = 0.5 * width;
        for (x, w) in xs.iter().zip(&ws) {
            total.add(w * half * f(mid + half * x));
        }
    }
    total.value()
}

/// Kahan-compensated accumulator. Deterministic for a fixed visit order.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let y = x - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Bisection on a bracket with f(lo) and f(hi) of opposite sign.
///
/// Runs until the bracket width drops below `xtol` or `max_iter` halvings,
/// then returns the midpoint. Panics if the bracket does not change sign.
pub fn bisect(f: impl Fn(f64) -> f64, lo: f64, hi: f64, max_iter: usize, xtol: f64) -> f64 {
    let (mut lo, mut hi) = (lo, hi);
    let flo = f(lo);
    let fhi = f(hi);
    assert!(
        flo.signum() != fhi.signum(),
        "bisect: no sign change on [{lo}, {hi}]"
    );
    let neg_low = flo < 0.0;
    for _ in 0..max_iter {
        let mid = 0.5 * (lo + hi);
        if hi - lo < xtol {
            break;
        }
        if (f(mid) < 0.0) == neg_low {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Central difference (f(x+h) - f(x-h)) / 2h.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Least-squares slope of ln(y) against ln(x).
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    assert!(points.len() >= 2, "slope fit needs two points");
    let n = points.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for &(x, y) in points {
        let (lx, ly) = (x.ln(), y.ln());
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

/// Golden-section minimum of a unimodal function on [a, b].
pub fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = 0.618_033_988_749_894_9;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..100 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// splitmix64 step; used to derive independent uniform shifts from one seed.
pub fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Uniform in [0, 1) from a splitmix64 output.
pub fn unit_from_bits(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

// Error-free transforms for the compensated tangent below.

fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let err = a.mul_add(b, -p);
    (p, err)
}

// pi split into high and low parts; PI_HI is f64 pi, PI_LO the next word.
const PI_HI: f64 = std::f64::consts::PI;
const PI_LO: f64 = 1.224_646_799_147_353_2e-16;

/// tan(x) with the argument reduced modulo pi in double-double arithmetic.
///
/// The reduction error, which dominates plain `f64::tan` for arguments of a
/// few pi, drops to ~1e-32, so the result carries roughly twice the working
/// precision through the reduction step.
pub fn tan_compensated(x: f64) -> f64 {
    tan_dd(x, 0.0)
}

fn tan_dd(x_hi: f64, x_lo: f64) -> f64 {
    let k = (x_hi / PI_HI).round();
    let (p, pe) = two_prod(k, PI_HI);
    let (d, de) = two_sum(x_hi, -p);
    // Residual terms are tiny; plain arithmetic suffices for them.
    let corr = de - pe - k * PI_LO + x_lo;
    let (r_hi, r_lo) = two_sum(d, corr);
    let t = r_hi.tan();
    t + r_lo * (1.0 + t * t)
}

/// |tan(n delta) - n tan(delta)| with the product n*delta formed exactly and
/// the large argument reduced in double-double arithmetic.
pub fn equal_angle_residual_compensated(n: u32, delta: f64) -> f64 {
    let nf = n as f64;
    let (nd_hi, nd_lo) = two_prod(nf, delta);
    (tan_dd(nd_hi, nd_lo) - nf * delta.tan()).abs()
}
