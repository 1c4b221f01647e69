//! Conductance-based point neurons. Units: mV, ms, µA/cm², mS/cm², C = 1 µF/cm².

#[inline]
fn boltz(v: f64, theta: f64, sigma: f64) -> f64 {
    1.0 / (1.0 + (-(v - theta) / sigma).exp())
}

#[inline]
fn tau_sig(v: f64, t0: f64, t1: f64, theta: f64, sigma: f64) -> f64 {
    t0 + t1 / (1.0 + (-(v - theta) / sigma).exp())
}

/// Membrane potential that counts as a spike on upward crossing.
pub const SPIKE_THRESHOLD_MV: f64 = -20.0;

/// Subthalamic neuron: leak, Na, delayed-rectifier K, low-threshold T-type Ca,
/// high-threshold Ca, and Ca-dependent AHP K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stn {
    pub v: f64,
    h: f64,
    n: f64,
    r: f64,
    ca: f64,
}

impl Stn {
    pub fn at_rest() -> Self {
        Self {
            v: -62.0,
            h: 0.5,
            n: 0.1,
            r: 0.3,
            ca: 0.1,
        }
    }

    pub fn step(&mut self, i_in: f64, dt: f64) {
        let v = self.v;
        let m_inf = boltz(v, -30.0, 15.0);
        let h_inf = boltz(v, -39.0, -3.1);
        let n_inf = boltz(v, -32.0, 8.0);
        let r_inf = boltz(v, -67.0, -2.0);
        let a_inf = boltz(v, -63.0, 7.8);
        let s_inf = boltz(v, -39.0, 8.0);
        let b_inf = boltz(self.r, 0.4, 0.1) - boltz(0.0, 0.4, 0.1);

        let i_l = 2.25 * (v + 60.0);
        let i_k = 45.0 * self.n.powi(4) * (v + 80.0);
        let i_na = 37.5 * m_inf.powi(3) * self.h * (v - 55.0);
        let i_t = 0.5 * a_inf.powi(3) * b_inf * b_inf * (v - 140.0);
        let i_ca = 0.5 * s_inf * s_inf * (v - 140.0);
        let i_ahp = 9.0 * (v + 80.0) * self.ca / (self.ca + 15.0);

        let tau_h = tau_sig(v, 1.0, 500.0, -57.0, -3.0);
        let tau_n = tau_sig(v, 1.0, 100.0, -80.0, -26.0);
        let tau_r = tau_sig(v, 40.0, 17.5, 68.0, -2.2);

        self.v += dt * (-i_l - i_k - i_na - i_t - i_ca - i_ahp + i_in);
        self.h += dt * 0.75 * (h_inf - self.h) / tau_h;
        self.n += dt * 0.75 * (n_inf - self.n) / tau_n;
        self.r += dt * 0.2 * (r_inf - self.r) / tau_r;
        self.ca += dt * 3.75e-5 * (-i_ca - i_t - 22.5 * self.ca);
    }
}

/// Pallidal neuron (GPe and GPi share the model): leak, Na, K, T-type Ca,
/// high-threshold Ca, and AHP K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pallidal {
    pub v: f64,
    h: f64,
    n: f64,
    r: f64,
    ca: f64,
}

impl Pallidal {
    pub fn at_rest() -> Self {
        Self {
            v: -65.0,
            h: 0.5,
            n: 0.1,
            r: 0.5,
            ca: 0.1,
        }
    }

    pub fn step(&mut self, i_in: f64, dt: f64) {
        let v = self.v;
        let m_inf = boltz(v, -37.0, 10.0);
        let h_inf = boltz(v, -58.0, -12.0);
        let n_inf = boltz(v, -50.0, 14.0);
        let r_inf = boltz(v, -70.0, -2.0);
        let a_inf = boltz(v, -57.0, 2.0);
        let s_inf = boltz(v, -35.0, 2.0);

        let i_l = 0.1 * (v + 65.0);
        let i_k = 30.0 * self.n.powi(4) * (v + 80.0);
        let i_na = 120.0 * m_inf.powi(3) * self.h * (v - 55.0);
        let i_t = 0.5 * a_inf.powi(3) * self.r * (v - 120.0);
        let i_ca = 0.15 * s_inf * s_inf * (v - 120.0);
        let i_ahp = 30.0 * (v + 80.0) * self.ca / (self.ca + 30.0);

        let tau_hn = tau_sig(v, 0.05, 0.27, -40.0, -12.0);

        self.v += dt * (-i_l - i_k - i_na - i_t - i_ca - i_ahp + i_in);
        self.h += dt * 0.05 * (h_inf - self.h) / tau_hn;
        self.n += dt * 0.1 * (n_inf - self.n) / tau_hn;
        self.r += dt * (r_inf - self.r) / 30.0;
        self.ca += dt * 1e-4 * (-i_ca - i_t - 15.0 * self.ca);
    }
}

/// Thalamocortical relay neuron with a T-type Ca current.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thalamic {
    pub v: f64,
    h: f64,
    r: f64,
}

impl Thalamic {
    pub fn at_rest() -> Self {
        Self {
            v: -65.0,
            h: 0.5,
            r: 0.5,
        }
    }

    pub fn step(&mut self, i_in: f64, dt: f64) {
        let v = self.v;
        let m_inf = boltz(v, -37.0, 7.0);
        let h_inf = boltz(v, -41.0, -4.0);
        let p_inf = boltz(v, -60.0, 6.2);
        let r_inf = boltz(v, -84.0, -4.0);
        let a_h = 0.128 * (-(v + 46.0) / 18.0).exp();
        let b_h = 4.0 / (1.0 + (-(v + 23.0) / 5.0).exp());
        let tau_h = 1.0 / (a_h + b_h);
        let tau_r = 0.15 * (28.0 + (-(v + 25.0) / 10.5).exp());

        let i_l = 0.05 * (v + 70.0);
        let i_na = 3.0 * m_inf.powi(3) * self.h * (v - 50.0);
        let i_k = 5.0 * (0.75 * (1.0 - self.h)).powi(4) * (v + 75.0);
        let i_t = 5.0 * p_inf * p_inf * self.r * v;

        self.v += dt * (-i_l - i_na - i_k - i_t + i_in);
        self.h += dt * (h_inf - self.h) / tau_h;
        self.r += dt * (r_inf - self.r) / tau_r;
    }
}

/// Parameters of the single-compartment cortical model (Na, K, slow M-type K).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorticalParams {
    pub g_leak: f64,
    pub e_leak: f64,
    pub g_na: f64,
    pub g_k: f64,
    pub g_m: f64,
    pub v_t: f64,
    pub tau_max: f64,
}

impl CorticalParams {
    /// Regular-spiking pyramidal cell with spike-frequency adaptation.
    pub const REGULAR_SPIKING: Self = Self {
        g_leak: 0.1,
        e_leak: -70.0,
        g_na: 50.0,
        g_k: 5.0,
        g_m: 0.07,
        v_t: -56.2,
        tau_max: 608.0,
    };

    /// Fast-spiking interneuron.
    pub const FAST_SPIKING: Self = Self {
        g_leak: 0.15,
        e_leak: -70.0,
        g_na: 50.0,
        g_k: 10.0,
        g_m: 0.0,
        v_t: -63.0,
        tau_max: 502.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cortical {
    pub v: f64,
    m: f64,
    h: f64,
    n: f64,
    p: f64,
}

/// `x / (exp(x / k) - 1)` with its limit at `x = 0`.
#[inline]
fn vtrap(x: f64, k: f64) -> f64 {
    if (x / k).abs() < 1e-6 {
        k * (1.0 - x / (2.0 * k))
    } else {
        x / ((x / k).exp() - 1.0)
    }
}

impl Cortical {
    pub fn at_rest() -> Self {
        Self {
            v: -70.0,
            m: 0.0,
            h: 1.0,
            n: 0.0,
            p: 0.0,
        }
    }

    pub fn step(&mut self, params: &CorticalParams, i_in: f64, dt: f64) {
        let v = self.v;
        let u = v - params.v_t;
        let a_m = 0.32 * vtrap(-(u - 13.0), 4.0);
        let b_m = 0.28 * vtrap(u - 40.0, 5.0);
        let a_h = 0.128 * (-(u - 17.0) / 18.0).exp();
        let b_h = 4.0 / (1.0 + (-(u - 40.0) / 5.0).exp());
        let a_n = 0.032 * vtrap(-(u - 15.0), 5.0);
        let b_n = 0.5 * (-(u - 10.0) / 40.0).exp();
        let p_inf = boltz(v, -35.0, 10.0);
        let tau_p = params.tau_max / (3.3 * ((v + 35.0) / 20.0).exp() + (-(v + 35.0) / 20.0).exp());

        let i_l = params.g_leak * (v - params.e_leak);
        let i_na = params.g_na * self.m.powi(3) * self.h * (v - 50.0);
        let i_k = params.g_k * self.n.powi(4) * (v + 90.0);
        let i_m = params.g_m * self.p * (v + 90.0);

        self.v += dt * (-i_l - i_na - i_k - i_m + i_in);
        self.m += dt * (a_m * (1.0 - self.m) - b_m * self.m);
        self.h += dt * (a_h * (1.0 - self.h) - b_h * self.h);
        self.n += dt * (a_n * (1.0 - self.n) - b_n * self.n);
        self.p += dt * (p_inf - self.p) / tau_p;
    }
}
