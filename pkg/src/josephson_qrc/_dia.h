/*
 * Lindblad right-hand side on split real/imaginary planes.
 *
 * Operators are stored by diagonals: re[k*d + i] + 1j*im[k*d + i] = M[i, i + off[k]],
 * zero where i + off[k] falls outside [0, d).  Source planes must carry at least
 * max|off| * (d + 1) zeros of padding on both sides so shifted reads stay in bounds;
 * those reads are always multiplied by a zero coefficient.
 */
#ifndef JQRC_DIA_H
#define JQRC_DIA_H

typedef double vd __attribute__((vector_size(64), aligned(8)));
#define VW 8

typedef struct {
    int nk;
    const int* off;
    const double* re;
    const double* im;
} dia_t;

/* t = s M^dagger, all rows and columns. */
static void dia_right_dag(int d, dia_t m, const double* sr, const double* si,
                          double* tr, double* ti)
{
    for (int i = 0; i < d; i++) {
        const double* rr = sr + i * d;
        const double* ri = si + i * d;
        int l0 = 0;
        for (; l0 + 2 * VW <= d; l0 += 2 * VW) {
            vd p0 = {0}, p1 = {0}, q0 = {0}, q1 = {0}, u0 = {0}, u1 = {0}, w0 = {0}, w1 = {0};
            for (int k = 0; k < m.nk; k++) {
                const double* cr = m.re + k * d + l0;
                const double* ci = m.im + k * d + l0;
                const vd cr0 = *(const vd*)cr, cr1 = *(const vd*)(cr + VW);
                const vd ci0 = *(const vd*)ci, ci1 = *(const vd*)(ci + VW);
                const double* xr = rr + l0 + m.off[k];
                const double* xi = ri + l0 + m.off[k];
                const vd xr0 = *(const vd*)xr, xr1 = *(const vd*)(xr + VW);
                const vd xi0 = *(const vd*)xi, xi1 = *(const vd*)(xi + VW);
                p0 += cr0 * xr0; p1 += cr1 * xr1; q0 += ci0 * xi0; q1 += ci1 * xi1;
                u0 += cr0 * xi0; u1 += cr1 * xi1; w0 -= ci0 * xr0; w1 -= ci1 * xr1;
            }
            *(vd*)(tr + i * d + l0) = p0 + q0;
            *(vd*)(tr + i * d + l0 + VW) = p1 + q1;
            *(vd*)(ti + i * d + l0) = u0 + w0;
            *(vd*)(ti + i * d + l0 + VW) = u1 + w1;
        }
        for (int l = l0; l < d; l++) {
            double ar = 0.0, ai = 0.0;
            for (int k = 0; k < m.nk; k++) {
                const double cr = m.re[k * d + l], ci = m.im[k * d + l];
                const double xr = rr[l + m.off[k]], xi = ri[l + m.off[k]];
                ar += cr * xr + ci * xi;
                ai += cr * xi - ci * xr;
            }
            tr[i * d + l] = ar;
            ti[i * d + l] = ai;
        }
    }
}

/* out[i, l0:l0+2*VW] of K s + s K^dagger + sum_c C_c t_c */
static inline void lind_block2(int d, int i, int l0, dia_t kop, int m, const dia_t* cops,
                               const double* const* tr, const double* const* ti,
                               const double* sr, const double* si, double* outr, double* outi)
{
    vd p0 = {0}, p1 = {0}, q0 = {0}, q1 = {0}, u0 = {0}, u1 = {0}, w0 = {0}, w1 = {0};
    for (int k = 0; k < kop.nk; k++) {
        const int o = kop.off[k];
        const double a = kop.re[k * d + i], b = kop.im[k * d + i];
        const double* xr = sr + (i + o) * d + l0;
        const double* xi = si + (i + o) * d + l0;
        const vd xr0 = *(const vd*)xr, xr1 = *(const vd*)(xr + VW);
        const vd xi0 = *(const vd*)xi, xi1 = *(const vd*)(xi + VW);
        p0 += a * xr0; p1 += a * xr1; q0 -= b * xi0; q1 -= b * xi1;
        u0 += a * xi0; u1 += a * xi1; w0 += b * xr0; w1 += b * xr1;
        const double* kr = kop.re + k * d + l0;
        const double* ki = kop.im + k * d + l0;
        const vd cr0 = *(const vd*)kr, cr1 = *(const vd*)(kr + VW);
        const vd ci0 = *(const vd*)ki, ci1 = *(const vd*)(ki + VW);
        const double* yr = sr + i * d + l0 + o;
        const double* yi = si + i * d + l0 + o;
        const vd yr0 = *(const vd*)yr, yr1 = *(const vd*)(yr + VW);
        const vd yi0 = *(const vd*)yi, yi1 = *(const vd*)(yi + VW);
        p0 += cr0 * yr0; p1 += cr1 * yr1; q0 += ci0 * yi0; q1 += ci1 * yi1;
        u0 += cr0 * yi0; u1 += cr1 * yi1; w0 -= ci0 * yr0; w1 -= ci1 * yr1;
    }
    for (int c = 0; c < m; c++) {
        const dia_t cc = cops[c];
        for (int k = 0; k < cc.nk; k++) {
            const double a = cc.re[k * d + i], b = cc.im[k * d + i];
            const double* xr = tr[c] + (i + cc.off[k]) * d + l0;
            const double* xi = ti[c] + (i + cc.off[k]) * d + l0;
            const vd xr0 = *(const vd*)xr, xr1 = *(const vd*)(xr + VW);
            const vd xi0 = *(const vd*)xi, xi1 = *(const vd*)(xi + VW);
            p0 += a * xr0; p1 += a * xr1; q0 -= b * xi0; q1 -= b * xi1;
            u0 += a * xi0; u1 += a * xi1; w0 += b * xr0; w1 += b * xr1;
        }
    }
    *(vd*)(outr + i * d + l0) = p0 + q0;
    *(vd*)(outr + i * d + l0 + VW) = p1 + q1;
    *(vd*)(outi + i * d + l0) = u0 + w0;
    *(vd*)(outi + i * d + l0 + VW) = u1 + w1;
}

static inline void lind_one(int d, int i, int l, dia_t kop, int m, const dia_t* cops,
                            const double* const* tr, const double* const* ti,
                            const double* sr, const double* si, double* outr, double* outi)
{
    double ar = 0.0, ai = 0.0;
    for (int k = 0; k < kop.nk; k++) {
        const int o = kop.off[k];
        const double a = kop.re[k * d + i], b = kop.im[k * d + i];
        const double xr = sr[(i + o) * d + l], xi = si[(i + o) * d + l];
        ar += a * xr - b * xi;
        ai += a * xi + b * xr;
        const double cr = kop.re[k * d + l], ci = kop.im[k * d + l];
        const double yr = sr[i * d + l + o], yi = si[i * d + l + o];
        ar += cr * yr + ci * yi;
        ai += cr * yi - ci * yr;
    }
    for (int c = 0; c < m; c++) {
        const dia_t cc = cops[c];
        for (int k = 0; k < cc.nk; k++) {
            const double a = cc.re[k * d + i], b = cc.im[k * d + i];
            const double xr = tr[c][(i + cc.off[k]) * d + l], xi = ti[c][(i + cc.off[k]) * d + l];
            ar += a * xr - b * xi;
            ai += a * xi + b * xr;
        }
    }
    outr[i * d + l] = ar;
    outi[i * d + l] = ai;
}

/*
 * out = K s + s K^dagger + sum_c C_c s C_c^dagger for Hermitian s.
 * Only the block upper triangle is evaluated; the strict lower triangle is
 * mirrored, so out is Hermitian bit for bit.
 */
static void dia_lindblad(int d, dia_t kop, int m, const dia_t* cops,
                         double* const* tr, double* const* ti,
                         const double* sr, const double* si, double* outr, double* outi)
{
    for (int c = 0; c < m; c++)
        dia_right_dag(d, cops[c], sr, si, tr[c], ti[c]);
    const double* const* ctr = (const double* const*)tr;
    const double* const* cti = (const double* const*)ti;
    for (int i = 0; i < d; i++) {
        int l0 = (i / (2 * VW)) * (2 * VW);
        for (; l0 + 2 * VW <= d; l0 += 2 * VW)
            lind_block2(d, i, l0, kop, m, cops, ctr, cti, sr, si, outr, outi);
        for (; l0 < d; l0++)
            lind_one(d, i, l0, kop, m, cops, ctr, cti, sr, si, outr, outi);
    }
    for (int i = 0; i < d; i++) {
        outi[i * d + i] = 0.0;
        for (int l = 0; l < i; l++) {
            outr[i * d + l] = outr[l * d + i];
            outi[i * d + l] = -outi[l * d + i];
        }
    }
}

/*
 * nsteps classical RK4 steps of size h plus one of size last_h (if > 0) on
 * planes r (in place).  s, k, acc are scratch planes with the same padding.
 */
static void dia_rk4(int d, dia_t kop, int m, const dia_t* cops,
                    double* const* tr, double* const* ti,
                    double* rr, double* ri, double* sr, double* si,
                    double* kr, double* ki, double* ar, double* ai,
                    int nsteps, double h, double last_h)
{
    const int n = d * d;
    const int total = nsteps + (last_h > 0.0 ? 1 : 0);
    for (int s = 0; s < total; s++) {
        const double hs = s < nsteps ? h : last_h;
        const double h2 = 0.5 * hs, h6 = hs / 6.0;
        double* restrict Rr = rr; double* restrict Ri = ri;
        double* restrict Sr = sr; double* restrict Si = si;
        double* restrict Kr = kr; double* restrict Ki = ki;
        double* restrict Ar = ar; double* restrict Ai = ai;
        dia_lindblad(d, kop, m, cops, tr, ti, Rr, Ri, Kr, Ki);
        for (int i = 0; i < n; i++) {
            Ar[i] = Kr[i]; Ai[i] = Ki[i];
            Sr[i] = Rr[i] + h2 * Kr[i]; Si[i] = Ri[i] + h2 * Ki[i];
        }
        dia_lindblad(d, kop, m, cops, tr, ti, Sr, Si, Kr, Ki);
        for (int i = 0; i < n; i++) {
            Ar[i] += 2.0 * Kr[i]; Ai[i] += 2.0 * Ki[i];
            Sr[i] = Rr[i] + h2 * Kr[i]; Si[i] = Ri[i] + h2 * Ki[i];
        }
        dia_lindblad(d, kop, m, cops, tr, ti, Sr, Si, Kr, Ki);
        for (int i = 0; i < n; i++) {
            Ar[i] += 2.0 * Kr[i]; Ai[i] += 2.0 * Ki[i];
            Sr[i] = Rr[i] + hs * Kr[i]; Si[i] = Ri[i] + hs * Ki[i];
        }
        dia_lindblad(d, kop, m, cops, tr, ti, Sr, Si, Kr, Ki);
        for (int i = 0; i < n; i++) {
            Rr[i] += h6 * (Ar[i] + Kr[i]); Ri[i] += h6 * (Ai[i] + Ki[i]);
        }
    }
}

#endif
