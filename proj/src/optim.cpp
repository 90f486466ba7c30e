#include "genport/optim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace genport {

NelderMeadResult nelder_mead(const std::function<double(const Vec&)>& f,
                             const Vec& x0, const NelderMeadOptions& opt) {
    const int n = static_cast<int>(x0.size());
    NelderMeadResult res;
    int evals = 0;
    auto eval = [&](const Vec& x) {
        ++evals;
        double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    std::vector<Vec> pts(n + 1, x0);
    std::vector<double> fv(n + 1);
    for (int i = 0; i < n; ++i) {
        double step = opt.init_step * std::max(1.0, std::fabs(x0[i]));
        pts[i + 1][i] += step;
    }
    for (int i = 0; i <= n; ++i) fv[i] = eval(pts[i]);

    std::vector<int> ord(n + 1);
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;
    bool converged = false;

    while (evals < opt.max_evals) {
        std::iota(ord.begin(), ord.end(), 0);
        std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        const int best = ord[0], worst = ord[n], second = ord[n - 1];

        double diam = 0.0;
        for (int i = 1; i <= n; ++i)
            diam = std::max(diam, (pts[ord[i]] - pts[best]).cwiseAbs().maxCoeff());
        const double spread = std::fabs(fv[worst] - fv[best]);
        if (diam < opt.xtol || (opt.ftol > 0.0 && spread < opt.ftol)) {
            converged = true;
            break;
        }

        Vec centroid = Vec::Zero(n);
        for (int i = 0; i <= n; ++i)
            if (i != worst) centroid += pts[i];
        centroid /= n;

        Vec xr = centroid + alpha * (centroid - pts[worst]);
        double fr = eval(xr);
        if (fr < fv[best]) {
            Vec xe = centroid + gamma * (centroid - pts[worst]);
            double fe = eval(xe);
            if (fe < fr) { pts[worst] = xe; fv[worst] = fe; }
            else { pts[worst] = xr; fv[worst] = fr; }
        } else if (fr < fv[second]) {
            pts[worst] = xr;
            fv[worst] = fr;
        } else {
            const bool outside = fr < fv[worst];
            Vec xc = outside ? Vec(centroid + rho * (xr - centroid))
                             : Vec(centroid - rho * (centroid - pts[worst]));
            double fc = eval(xc);
            if (fc < (outside ? fr : fv[worst])) {
                pts[worst] = xc;
                fv[worst] = fc;
            } else {
                for (int i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    pts[i] = pts[best] + sigma * (pts[i] - pts[best]);
                    fv[i] = eval(pts[i]);
                }
            }
        }
    }

    int best = 0;
    for (int i = 1; i <= n; ++i)
        if (fv[i] < fv[best]) best = i;
    res.x = pts[best];
    res.fx = fv[best];
    res.evals = evals;
    res.converged = converged;
    return res;
}

double scan_golden_min(const std::function<double(double)>& f, double lo,
                       double hi, int scan_points, double xtol) {
    double best_x = lo, best_f = f(lo);
    for (int i = 1; i <= scan_points; ++i) {
        const double x = lo + (hi - lo) * i / scan_points;
        const double v = f(x);
        if (v < best_f) { best_f = v; best_x = x; }
    }
    const double h = (hi - lo) / scan_points;
    double a = std::max(lo, best_x - h), b = std::min(hi, best_x + h);
    const double invphi = 0.6180339887498949;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > xtol) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - invphi * (b - a);
            fc = f(c);
        } else {
            a = c; c = d; fc = fd;
            d = a + invphi * (b - a);
            fd = f(d);
        }
    }
    const double xm = 0.5 * (a + b);
    return f(xm) <= best_f ? xm : best_x;
}

}  // namespace genport
