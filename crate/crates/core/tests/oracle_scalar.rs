//! Exact reference values from `oracle/derive_scalar.py` and a second,
//! plain-array transcription of the local recursions.

use secfusion::cross::{init_cross_pair, propagate_cross, CrossInput};
use secfusion::local::{compute_gains, compute_xi, init_local, step_local, LocalInit};
use secfusion::model::{build_augmented_subsystem, build_enhanced_sensor, cross_process_noise, Defense, SensorSpec, SystemModel};
use secfusion::{AugmentedSubsystem, Mat, Vector};

fn scalar(v: f64) -> Mat {
    Mat::from_element(1, 1, v)
}

fn m(rows: usize, cols: usize, num: &[f64], den: f64) -> Mat {
    Mat::from_row_slice(rows, cols, num) / den
}

fn close(what: &str, got: &Mat, want: &Mat, tol: f64) {
    assert_eq!(got.shape(), want.shape(), "{what}");
    let d = (got - want).amax();
    assert!(d <= tol, "{what}: off by {d:e}\n got {got}\nwant {want}");
}

fn weak_strong() -> AugmentedSubsystem {
    let sys = SystemModel::new(scalar(1.0), scalar(1.0)).unwrap();
    let w = SensorSpec::new(1, scalar(1.0), scalar(1.0), Defense::Weak).unwrap();
    let s = SensorSpec::new(2, scalar(1.0), scalar(1.0), Defense::Strong).unwrap();
    build_augmented_subsystem(&sys, &build_enhanced_sensor(&w, &[&s]).unwrap(), 1).unwrap()
}

#[test]
fn first_step_exact() {
    let aug = weak_strong();
    let st = init_local(1, &aug, &LocalInit::default(), 1.0).unwrap();
    let xi = compute_xi(&st, &aug);
    close("Ξ¹", &xi.xi1, &scalar(3.0), 1e-12);
    close("Ξ²", &xi.xi2, &m(2, 1, &[0.0, 1.0], 1.0), 1e-12);
    close("Ξ", &xi.xi, &Mat::identity(2, 2).scale(2.0), 1e-12);
    let g = compute_gains(&st, &xi, &aug).unwrap();
    close("K", &g.k, &m(2, 2, &[2.0, 6.0, 6.0, -4.0], 11.0), 1e-12);
    close("Γ", &g.gamma, &m(1, 2, &[6.0, -4.0], 11.0), 1e-12);

    let step = step_local(&st, &Vector::from_vec(vec![1.0, 1.0]), &aug).unwrap();
    let s1 = &step.state;
    close("P^X(1)", &s1.p_x, &m(2, 2, &[6.0, -4.0, -4.0, 10.0], 11.0), 1e-12);
    close("P^φ(1)", &s1.p_phi, &scalar(21.0 / 11.0), 1e-12);
    close("U(1)", &s1.u, &Mat::zeros(2, 1), 1e-12);
    close("V(1)", &s1.v, &scalar(12.0 / 11.0), 1e-12);
    close("X̂(1)", &Mat::from_column_slice(2, 1, s1.x_hat.as_slice()), &m(2, 1, &[8.0, 2.0], 11.0), 1e-12);
    close("φ̂(1)", &Mat::from_column_slice(1, 1, s1.phi_hat.as_slice()), &scalar(2.0 / 11.0), 1e-12);

    let s2 = step_local(s1, &Vector::zeros(2), &aug).unwrap();
    let d = 1427.0;
    close("K(2)", &s2.gains.k, &m(2, 2, &[165.0, 778.0, 954.0, -613.0], d), 1e-12);
    close("Γ(2)", &s2.gains.gamma, &m(1, 2, &[866.0, -362.0], d), 1e-12);
    close("P^X(2)", &s2.state.p_x, &m(2, 2, &[778.0, -613.0, -613.0, 1567.0], d), 1e-12);
    close("P^φ(2)", &s2.state.p_phi, &scalar(2087.0 / d), 1e-12);
    close("U(2)", &s2.state.u, &m(2, 1, &[270.0, -774.0], d), 1e-12);
    close("V(2)", &s2.state.v, &scalar(1176.0 / d), 1e-12);
}

#[test]
fn two_weak_sensors_cross_exact() {
    let sys = SystemModel::new(scalar(1.0), scalar(1.0)).unwrap();
    let augs: Vec<AugmentedSubsystem> = [1, 2]
        .iter()
        .map(|&id| {
            let w = SensorSpec::new(id, scalar(1.0), scalar(1.0), Defense::Weak).unwrap();
            build_augmented_subsystem(&sys, &build_enhanced_sensor(&w, &[]).unwrap(), 1).unwrap()
        })
        .collect();
    let mut l1 = init_local(1, &augs[0], &LocalInit::default(), 1.0).unwrap();
    let mut l2 = init_local(2, &augs[1], &LocalInit::default(), 1.0).unwrap();
    let (mut f, mut r) = init_cross_pair((1, 2), (1, 1), cross_process_noise(&sys, 1, 1), &Default::default()).unwrap();

    let want = [
        (25.0, [9.0, -6.0, -6.0, 4.0], 4.0, [6.0, -4.0], -4.0, 4.0),
        (15625.0, [13456.0, -11876.0, -11876.0, 10946.0], 5044.0, [7992.0, -6682.0], -5044.0, 5044.0),
    ];
    let p11 = [m(2, 2, &[6.0, -4.0, -4.0, 6.0], 5.0), m(2, 2, &[194.0, -149.0, -149.0, 204.0], 125.0)];
    for (k, (d, px, pphi, u, y, v)) in want.iter().enumerate() {
        let s1 = step_local(&l1, &Vector::zeros(1), &augs[0]).unwrap();
        let s2 = step_local(&l2, &Vector::zeros(1), &augs[1]).unwrap();
        let (nf, nr) = propagate_cross(
            &f,
            &r,
            CrossInput { gains: &s1.gains, aug: &augs[0] },
            CrossInput { gains: &s2.gains, aug: &augs[1] },
        );
        close("P^X_12", &nf.p_x, &m(2, 2, px, *d), 1e-12);
        close("P^φ_12", &nf.p_phi, &scalar(pphi / d), 1e-12);
        close("U_12", &nf.u, &m(2, 1, u, *d), 1e-12);
        close("Y_12", &nf.y, &scalar(y / d), 1e-12);
        close("V_12", &nf.v, &scalar(v / d), 1e-12);
        close("P^X_11", &s1.state.p_x, &p11[k], 1e-12);
        f = nf;
        r = nr;
        l1 = s1.state;
        l2 = s2.state;
    }
}

/// Row-major dense matrix with just enough arithmetic for the recursions.
#[derive(Clone, Debug)]
struct D {
    r: usize,
    c: usize,
    v: Vec<f64>,
}

impl D {
    fn zeros(r: usize, c: usize) -> D {
        D { r, c, v: vec![0.0; r * c] }
    }
    fn eye(n: usize) -> D {
        let mut d = D::zeros(n, n);
        for i in 0..n {
            d.v[i * n + i] = 1.0;
        }
        d
    }
    fn from(r: usize, c: usize, v: &[f64]) -> D {
        D { r, c, v: v.to_vec() }
    }
    fn at(&self, i: usize, j: usize) -> f64 {
        self.v[i * self.c + j]
    }
    fn t(&self) -> D {
        let mut o = D::zeros(self.c, self.r);
        for i in 0..self.r {
            for j in 0..self.c {
                o.v[j * self.r + i] = self.at(i, j);
            }
        }
        o
    }
    fn mul(&self, b: &D) -> D {
        assert_eq!(self.c, b.r);
        let mut o = D::zeros(self.r, b.c);
        for i in 0..self.r {
            for j in 0..b.c {
                o.v[i * b.c + j] = (0..self.c).map(|k| self.at(i, k) * b.at(k, j)).sum();
            }
        }
        o
    }
    fn add(&self, b: &D) -> D {
        D { r: self.r, c: self.c, v: self.v.iter().zip(&b.v).map(|(x, y)| x + y).collect() }
    }
    fn sub(&self, b: &D) -> D {
        self.add(&b.s(-1.0))
    }
    fn s(&self, a: f64) -> D {
        D { r: self.r, c: self.c, v: self.v.iter().map(|x| x * a).collect() }
    }
    /// Gauss-Jordan with partial pivoting.
    fn inv(&self) -> D {
        let n = self.r;
        let mut a = self.clone();
        let mut o = D::eye(n);
        for col in 0..n {
            let piv = (col..n).max_by(|&x, &y| a.at(x, col).abs().total_cmp(&a.at(y, col).abs())).unwrap();
            for j in 0..n {
                a.v.swap(col * n + j, piv * n + j);
                o.v.swap(col * n + j, piv * n + j);
            }
            let p = a.at(col, col);
            for j in 0..n {
                a.v[col * n + j] /= p;
                o.v[col * n + j] /= p;
            }
            for i in 0..n {
                if i != col {
                    let f = a.at(i, col);
                    for j in 0..n {
                        a.v[i * n + j] -= f * a.v[col * n + j];
                        o.v[i * n + j] -= f * o.v[col * n + j];
                    }
                }
            }
        }
        o
    }
    fn to_mat(&self) -> Mat {
        Mat::from_row_slice(self.r, self.c, &self.v)
    }
}

struct Ref {
    px: D,
    pphi: D,
    u: D,
    v: D,
    k: D,
    g: D,
    cprev: D,
}

fn ref_step(st: &Ref, a: &D, f: &D, c: &D, q: &D, r: &D, eta: f64) -> (Ref, D, D) {
    let (na, p) = (f.r, f.c);
    let ga_prev = D::eye(p).sub(&st.g.mul(&st.cprev).mul(f));
    let ka_prev = D::eye(na).sub(&st.k.mul(&st.cprev));
    let xi1 = D::eye(p).s(6.0 * eta).sub(&st.pphi).sub(&ga_prev.t().s(eta)).sub(&ga_prev.s(eta));
    let xi2 = st.u.add(&ka_prev.mul(f).s(eta));
    let axf = a.mul(&xi2).mul(&f.t());
    let xi = a.mul(&st.px).mul(&a.t()).add(q).add(&f.mul(&xi1).mul(&f.t())).sub(&axf).sub(&axf.t());
    let s = c.mul(&xi).mul(&c.t()).add(r);
    let si = s.inv();
    let k = xi.mul(&c.t()).mul(&si);
    let br = st
        .pphi
        .mul(&f.t())
        .add(&st.u.t().mul(&a.t()))
        .add(&ga_prev.mul(&f.t()).s(eta))
        .add(&f.mul(&ga_prev).t().s(eta))
        .add(&a.mul(&ka_prev).mul(f).t().s(eta))
        .sub(&f.t().s(6.0 * eta));
    let g = br.mul(&c.t()).mul(&si).s(-1.0);
    let gc = g.mul(c);
    let gcf = gc.mul(f);
    let ga = D::eye(p).sub(&gcf);
    let gb = gc.mul(a);
    let ka = D::eye(na).sub(&k.mul(c));
    let gbx = gb.mul(&xi2);
    let pphi = ga.mul(&xi1).sub(&xi1.mul(&gcf.t())).add(&gbx.t()).add(&gbx).add(&g.mul(r).mul(&g.t())).add(&gc.mul(&xi).mul(&gc.t()));
    let px = ka.mul(&xi).mul(&ka.t()).add(&k.mul(r).mul(&k.t()));
    let prev = st.g.mul(&st.cprev).mul(f);
    let u = ka
        .mul(&a.mul(&st.u).sub(&f.mul(&st.v)))
        .sub(&ka.mul(f).mul(&prev.t()).s(eta))
        .sub(&k.mul(r).mul(&g.t()))
        .add(&ka.mul(&xi).mul(&gc.t()));
    let gbu = gb.mul(&st.u);
    let v = gbu
        .t()
        .add(&gbu)
        .add(&st.v.mul(&ga.t()))
        .sub(&gcf.mul(&st.v))
        .sub(&prev.mul(&gcf.t()).s(eta))
        .sub(&gcf.mul(&prev.t()).s(eta))
        .add(&g.mul(&s).mul(&g.t()));
    (Ref { px, pphi, u, v, k: k.clone(), g: g.clone(), cprev: c.clone() }, k, g)
}

#[test]
fn matches_plain_transcription_over_many_steps() {
    let a_o = [0.95, 0.3, -0.2, 0.8];
    let sys = SystemModel::new(Mat::from_row_slice(2, 2, &a_o), Mat::from_row_slice(2, 2, &[0.3, 0.05, 0.05, 0.2])).unwrap();
    let w = SensorSpec::new(1, Mat::from_row_slice(1, 2, &[1.0, 0.5]), scalar(0.2), Defense::Weak).unwrap();
    let s = SensorSpec::new(2, Mat::from_row_slice(1, 2, &[0.0, 1.0]), scalar(0.4), Defense::Strong).unwrap();
    let aug = build_augmented_subsystem(&sys, &build_enhanced_sensor(&w, &[&s]).unwrap(), 1).unwrap();
    let eta = 0.7;

    let a = D::from(3, 3, &[0.95, 0.3, 0.0, -0.2, 0.8, 0.0, 0.0, 0.0, 1.0]);
    let f = D::from(3, 1, &[0.0, 0.0, 1.0]);
    let c = D::from(2, 3, &[1.0, 0.5, 1.0, 0.0, 1.0, 0.0]);
    let q = D::from(3, 3, &[0.3, 0.05, 0.0, 0.05, 0.2, 0.0, 0.0, 0.0, 0.0]);
    let r = D::from(2, 2, &[0.2, 0.0, 0.0, 0.4]);
    let mut rf = Ref {
        px: D::eye(3),
        pphi: D::eye(1),
        u: D::zeros(3, 1),
        v: D::zeros(1, 1),
        k: D::zeros(3, 2),
        g: D::zeros(1, 2),
        cprev: c.clone(),
    };
    let mut st = init_local(1, &aug, &LocalInit::default(), eta).unwrap();
    for step in 1..=60 {
        let (next, k, g) = ref_step(&rf, &a, &f, &c, &q, &r, eta);
        let out = step_local(&st, &Vector::zeros(2), &aug).unwrap();
        let tol = 1e-9;
        close(&format!("K({step})"), &out.gains.k, &k.to_mat(), tol);
        close(&format!("Γ({step})"), &out.gains.gamma, &g.to_mat(), tol);
        close(&format!("P^X({step})"), &out.state.p_x, &next.px.to_mat(), tol);
        close(&format!("P^φ({step})"), &out.state.p_phi, &next.pphi.to_mat(), tol);
        close(&format!("U({step})"), &out.state.u, &next.u.to_mat(), tol);
        close(&format!("V({step})"), &out.state.v, &next.v.to_mat(), tol);
        rf = next;
        st = out.state;
    }
}
