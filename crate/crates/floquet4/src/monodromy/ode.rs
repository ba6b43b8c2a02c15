//! Adaptive DOP853 integration of `Y' = A(t)Y` together with its second exterior power.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::PeriodicPotential;
use crate::quartic_basis::{principal_quartic_root, Mat4};

use super::{shift_for, MonodromyMatrix};

const MAX_STEP: f64 = 1e-2;
const MIN_STEP: f64 = 1e-13;
const MAX_STEPS: usize = 2_000_000;

/// Index pairs `a < b` labelling the basis `e_a ∧ e_b` of the second exterior power.
pub(crate) const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

const N: usize = 16 + 36;

type State = [Complex64; N];

fn pair_index(a: usize, b: usize) -> Option<(usize, f64)> {
    if a == b {
        return None;
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    PAIRS.iter().position(|&p| p == (lo, hi)).map(|i| (i, sign))
}

/// Sparse additive compound of a real 4×4 matrix: `(A e_c)∧e_d + e_c∧(A e_d)`.
fn compound(a: &[[f64; 4]; 4]) -> Vec<(usize, usize, f64)> {
    let mut out = Vec::new();
    for (col, &(c, d)) in PAIRS.iter().enumerate() {
        let mut acc = [0.0; 6];
        for r in 0..4 {
            if a[r][c] != 0.0 {
                if let Some((i, s)) = pair_index(r, d) {
                    acc[i] += s * a[r][c];
                }
            }
            if a[r][d] != 0.0 {
                if let Some((i, s)) = pair_index(c, r) {
                    acc[i] += s * a[r][d];
                }
            }
        }
        for (row, v) in acc.iter().enumerate() {
            if *v != 0.0 {
                out.push((row, col, *v));
            }
        }
    }
    out
}

struct System<'a> {
    potential: &'a PeriodicPotential,
    lambda: Complex64,
    shift: f64,
    shift_wedge: f64,
    shift_part: Vec<(usize, usize, f64)>,
    coupling_part: Vec<(usize, usize, f64)>,
}

impl System<'_> {
    fn rhs(&self, t: f64, y: &State, dy: &mut State) {
        let q = self.lambda - self.potential.value(t);
        let s = self.shift;
        for j in 0..4 {
            for k in 0..3 {
                dy[4 * k + j] = y[4 * (k + 1) + j] - s * y[4 * k + j];
            }
            dy[12 + j] = q * y[j] - s * y[12 + j];
        }
        let w = &y[16..];
        let dw = &mut dy[16..];
        for (i, e) in dw.iter_mut().enumerate() {
            *e = -self.shift_wedge * w[i];
        }
        for &(r, c, v) in &self.shift_part {
            for col in 0..6 {
                dw[6 * r + col] += v * w[6 * c + col];
            }
        }
        for &(r, c, v) in &self.coupling_part {
            for col in 0..6 {
                dw[6 * r + col] += q * v * w[6 * c + col];
            }
        }
    }
}

/// Integrates over [0, 1] with local error control at `tol` (measured on entries scaled by `|z|^{j-k}`).
pub fn monodromy_ode(potential: &PeriodicPotential, lambda: Complex64, tol: f64) -> Result<MonodromyMatrix> {
    if matches!(potential, PeriodicPotential::DeltaComb { .. }) {
        return Err(Error::BackendMismatch { backend: "ode", kind: "delta_comb" });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidPotential(format!("tolerance must be positive, got {tol}")));
    }
    let root = principal_quartic_root(lambda);
    let shift = shift_for(root.x);
    let zw = root.z.norm().max(1.0);

    let mut shift_mat = [[0.0; 4]; 4];
    for k in 0..3 {
        shift_mat[k][k + 1] = 1.0;
    }
    let mut coupling = [[0.0; 4]; 4];
    coupling[3][0] = 1.0;
    let sys = System {
        potential,
        lambda,
        shift,
        shift_wedge: 2.0 * shift,
        shift_part: compound(&shift_mat),
        coupling_part: compound(&coupling),
    };

    let mut weights = [0.0; N];
    for k in 0..4 {
        for j in 0..4 {
            weights[4 * k + j] = zw.powi(j as i32 - k as i32);
        }
    }
    for (r, &(a, b)) in PAIRS.iter().enumerate() {
        for (c, &(cc, dd)) in PAIRS.iter().enumerate() {
            weights[16 + 6 * r + c] = zw.powi((cc + dd) as i32 - (a + b) as i32);
        }
    }

    let mut y = [Complex64::new(0.0, 0.0); N];
    for k in 0..4 {
        y[5 * k] = Complex64::new(1.0, 0.0);
    }
    for r in 0..6 {
        y[16 + 7 * r] = Complex64::new(1.0, 0.0);
    }

    let mut t = 0.0;
    let mut h = (0.1 / zw).min(MAX_STEP);
    let mut k = [[Complex64::new(0.0, 0.0); N]; 12];
    let mut tmp = [Complex64::new(0.0, 0.0); N];
    let mut ynew = [Complex64::new(0.0, 0.0); N];
    sys.rhs(t, &y, &mut k[0]);
    let mut steps = 0;
    let mut last_rejected = false;

    while t < 1.0 {
        steps += 1;
        if steps > MAX_STEPS || h < MIN_STEP {
            return Err(Error::RangeExceeded { lambda });
        }
        let mut last = false;
        if t + h >= 1.0 {
            h = 1.0 - t;
            last = true;
        }
        stage(&sys, t, h, &y, &mut k, &mut tmp);

        let mut e5 = 0.0f64;
        let mut e3 = 0.0f64;
        let mut ymag_y = 0.0f64;
        let mut ymag_c = 0.0f64;
        for i in 0..N {
            let bsum = B1 * k[0][i] + B6 * k[5][i] + B7 * k[6][i] + B8 * k[7][i] + B9 * k[8][i]
                + B10 * k[9][i] + B11 * k[10][i] + B12 * k[11][i];
            ynew[i] = y[i] + h * bsum;
            let m = weights[i] * y[i].norm().max(ynew[i].norm());
            if i < 16 {
                ymag_y = ymag_y.max(m);
            } else {
                ymag_c = ymag_c.max(m);
            }
        }
        for i in 0..N {
            let bsum = B1 * k[0][i] + B6 * k[5][i] + B7 * k[6][i] + B8 * k[7][i] + B9 * k[8][i]
                + B10 * k[9][i] + B11 * k[10][i] + B12 * k[11][i];
            let sc = tol * if i < 16 { ymag_y } else { ymag_c } / weights[i];
            let err3 = bsum - BHH1 * k[0][i] - BHH2 * k[8][i] - BHH3 * k[11][i];
            let err5 = ER1 * k[0][i] + ER6 * k[5][i] + ER7 * k[6][i] + ER8 * k[7][i] + ER9 * k[8][i]
                + ER10 * k[9][i] + ER11 * k[10][i] + ER12 * k[11][i];
            e5 = e5.max(err5.norm() / sc);
            e3 = e3.max(err3.norm() / sc);
        }
        let mut deno = e5 * e5 + 0.01 * e3 * e3;
        if deno <= 0.0 {
            deno = 1.0;
        }
        let err = h * e5 * e5 / deno.sqrt();

        let fac11 = err.powf(1.0 / 8.0);
        let fac = (fac11 / 0.9).clamp(1.0 / 6.0, 3.0);
        let mut hnew = h / fac;
        if err <= 1.0 {
            t = if last { 1.0 } else { t + h };
            y = ynew;
            sys.rhs(t, &y, &mut k[0]);
            if last_rejected {
                hnew = hnew.min(h);
            }
            last_rejected = false;
        } else {
            hnew = h / (fac11 / 0.9).min(3.0);
            last_rejected = true;
        }
        h = hnew.min(MAX_STEP);
    }

    let mut entries: Mat4 = [[Complex64::new(0.0, 0.0); 4]; 4];
    for kk in 0..4 {
        for j in 0..4 {
            entries[kk][j] = y[4 * kk + j];
        }
    }
    let wedge: Complex64 = (0..6).map(|r| y[16 + 7 * r]).sum();
    Ok(MonodromyMatrix {
        lambda,
        entries,
        scale_exponent: shift,
        wedge_trace: Some(wedge),
    })
}

fn stage(sys: &System<'_>, t: f64, h: f64, y: &State, k: &mut [[Complex64; N]; 12], tmp: &mut State) {
    macro_rules! go {
        ($out:expr, $c:expr, $( ($coef:expr, $idx:expr) ),+ ) => {{
            for i in 0..N {
                let mut acc = Complex64::new(0.0, 0.0);
                $( acc += $coef * k[$idx][i]; )+
                tmp[i] = y[i] + h * acc;
            }
            let (head, tail) = k.split_at_mut($out);
            let _ = head;
            sys.rhs(t + $c * h, tmp, &mut tail[0]);
        }};
    }
    go!(1, C2, (A21, 0));
    go!(2, C3, (A31, 0), (A32, 1));
    go!(3, C4, (A41, 0), (A43, 2));
    go!(4, C5, (A51, 0), (A53, 2), (A54, 3));
    go!(5, C6, (A61, 0), (A64, 3), (A65, 4));
    go!(6, C7, (A71, 0), (A74, 3), (A75, 4), (A76, 5));
    go!(7, C8, (A81, 0), (A84, 3), (A85, 4), (A86, 5), (A87, 6));
    go!(8, C9, (A91, 0), (A94, 3), (A95, 4), (A96, 5), (A97, 6), (A98, 7));
    go!(9, C10, (A101, 0), (A104, 3), (A105, 4), (A106, 5), (A107, 6), (A108, 7), (A109, 8));
    go!(10, C11, (A111, 0), (A114, 3), (A115, 4), (A116, 5), (A117, 6), (A118, 7), (A119, 8), (A1110, 9));
    go!(11, 1.0, (A121, 0), (A124, 3), (A125, 4), (A126, 5), (A127, 6), (A128, 7), (A129, 8), (A1210, 9), (A1211, 10));
}

// Dormand–Prince 8(5,3) coefficients.
const A21: f64 = 5.26001519587677318785587544488E-2;
const A31: f64 = 1.97250569845378994544595329183E-2;
const A32: f64 = 5.91751709536136983633785987549E-2;
const A41: f64 = 2.95875854768068491816892993775E-2;
const A43: f64 = 8.87627564304205475450678981324E-2;
const A51: f64 = 2.41365134159266685502369798665E-1;
const A53: f64 = -8.84549479328286085344864962717E-1;
const A54: f64 = 9.24834003261792003115737966543E-1;
const A61: f64 = 3.7037037037037037037037037037E-2;
const A64: f64 = 1.70828608729473871279604482173E-1;
const A65: f64 = 1.25467687566822425016691814123E-1;
const A71: f64 = 3.7109375E-2;
const A74: f64 = 1.70252211019544039314978060272E-1;
const A75: f64 = 6.02165389804559606850219397283E-2;
const A76: f64 = -1.7578125E-2;
const A81: f64 = 3.70920001185047927108779319836E-2;
const A84: f64 = 1.70383925712239993810214054705E-1;
const A85: f64 = 1.07262030446373284651809199168E-1;
const A86: f64 = -1.53194377486244017527936158236E-2;
const A87: f64 = 8.27378916381402288758473766002E-3;
const A91: f64 = 6.24110958716075717114429577812E-1;
const A94: f64 = -3.36089262944694129406857109825E0;
const A95: f64 = -8.68219346841726006818189891453E-1;
const A96: f64 = 2.75920996994467083049415600797E1;
const A97: f64 = 2.01540675504778934086186788979E1;
const A98: f64 = -4.34898841810699588477366255144E1;
const A101: f64 = 4.77662536438264365890433908527E-1;
const A104: f64 = -2.48811461997166764192642586468E0;
const A105: f64 = -5.90290826836842996371446475743E-1;
const A106: f64 = 2.12300514481811942347288949897E1;
const A107: f64 = 1.52792336328824235832596922938E1;
const A108: f64 = -3.32882109689848629194453265587E1;
const A109: f64 = -2.03312017085086261358222928593E-2;
const A111: f64 = -9.3714243008598732571704021658E-1;
const A114: f64 = 5.18637242884406370830023853209E0;
const A115: f64 = 1.09143734899672957818500254654E0;
const A116: f64 = -8.14978701074692612513997267357E0;
const A117: f64 = -1.85200656599969598641566180701E1;
const A118: f64 = 2.27394870993505042818970056734E1;
const A119: f64 = 2.49360555267965238987089396762E0;
const A1110: f64 = -3.0467644718982195003823669022E0;
const A121: f64 = 2.27331014751653820792359768449E0;
const A124: f64 = -1.05344954667372501984066689879E1;
const A125: f64 = -2.00087205822486249909675718444E0;
const A126: f64 = -1.79589318631187989172765950534E1;
const A127: f64 = 2.79488845294199600508499808837E1;
const A128: f64 = -2.85899827713502369474065508674E0;
const A129: f64 = -8.87285693353062954433549289258E0;
const A1210: f64 = 1.23605671757943030647266201528E1;
const A1211: f64 = 6.43392746015763530355970484046E-1;
const B1: f64 = 5.42937341165687622380535766363E-2;
const B6: f64 = 4.45031289275240888144113950566E0;
const B7: f64 = 1.89151789931450038304281599044E0;
const B8: f64 = -5.8012039600105847814672114227E0;
const B9: f64 = 3.1116436695781989440891606237E-1;
const B10: f64 = -1.52160949662516078556178806805E-1;
const B11: f64 = 2.01365400804030348374776537501E-1;
const B12: f64 = 4.47106157277725905176885569043E-2;
const BHH1: f64 = 0.244094488188976377952755905512E+00;
const BHH2: f64 = 0.733846688281611857341361741547E+00;
const BHH3: f64 = 0.220588235294117647058823529412E-01;
const C2: f64 = 0.526001519587677318785587544488E-01;
const C3: f64 = 0.789002279381515978178381316732E-01;
const C4: f64 = 0.118350341907227396726757197510E+00;
const C5: f64 = 0.281649658092772603273242802490E+00;
const C6: f64 = 0.333333333333333333333333333333E+00;
const C7: f64 = 0.25E+00;
const C8: f64 = 0.307692307692307692307692307692E+00;
const C9: f64 = 0.651282051282051282051282051282E+00;
const C10: f64 = 0.6E+00;
const C11: f64 = 0.857142857142857142857142857142E+00;
const ER1: f64 = 0.1312004499419488073250102996E-01;
const ER6: f64 = -0.1225156446376204440720569753E+01;
const ER7: f64 = -0.4957589496572501915214079952E+00;
const ER8: f64 = 0.1664377182454986536961530415E+01;
const ER9: f64 = -0.3503288487499736816886487290E+00;
const ER10: f64 = 0.3341791187130174790297318841E+00;
const ER11: f64 = 0.8192320648511571246570742613E-01;
const ER12: f64 = -0.2235530786388629525884427845E-01;
