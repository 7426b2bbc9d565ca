#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "mrflow/errors.hpp"
#include "mrflow/flow_fields.hpp"
#include "mrflow/mr_model.hpp"

using namespace mrflow;

namespace {

Vec v2(double a, double b) {
    Vec v(2);
    v << a, b;
    return v;
}

void check_vec(const Vec& v, std::initializer_list<double> vals, double tol) {
    int k = 0;
    for (double e : vals) {
        CHECK(std::abs(v[k] - e) <= tol);
        ++k;
    }
}

}  // namespace

// Reference values below come from a symbolic differentiation of the double-gyre stream function.
TEST_CASE("double gyre jet at the gyre centre line") {
    const auto spec = FieldSpec::double_gyre();
    const FieldJet j = eval_jet(spec, v2(1.0, 0.5), 0.0);
    check_vec(j.u, {0.0, -0.31415926535897932}, 1e-14);
    check_vec(j.lap_u, {0.0, 6.2012553360599640}, 1e-12);
    CHECK(j.grad_u.norm() < 1e-14);
    CHECK(j.du_dt_material.norm() < 1e-14);
}

TEST_CASE("double gyre jet and compact fields at a generic point") {
    const auto spec = FieldSpec::double_gyre();
    const FieldJet j = eval_jet(spec, v2(1.2, 0.3), 0.7);
    const double tol = 1e-13;
    check_vec(j.u, {0.088514700051115763, -0.22685687337865781}, tol);
    check_vec(j.du_dt, {-0.027787230875522285, -0.026317436086641128}, tol);
    check_vec(j.lap_u, {-1.7338651884083563, 4.6543328136583146}, 1e-12);
    check_vec(j.du_dt_material, {0.10487304222101599, 0.12450990443363576}, tol);
    CHECK(std::abs(j.grad_u(0, 0) - 0.51780096514110501) < tol);
    CHECK(std::abs(j.grad_u(0, 1) + 0.38274033617649090) < tol);
    CHECK(std::abs(j.grad_u(1, 0) - 0.37689369694129012) < tol);
    CHECK(std::abs(j.grad_u(1, 1) + 0.51780096514110501) < tol);

    const MRParams p = derive_params(0.5, 0.5, 100.0, v2(0.0, -1.0));
    const CompactFields f = compute_compact_fields(j, p);
    check_vec(f.A, {0.082012705594584427, -0.20940312532743913}, tol);
    check_vec(f.B, {-0.010349371368553445, -0.26329948633060947}, 1e-12);
    CHECK(std::abs(f.M(0, 0) - 0.47796277354632943) < 1e-12);
    CHECK(std::abs(f.M(0, 1) + 0.35462550843970398) < 1e-12);
    CHECK(std::abs(f.M(1, 0) - 0.35218310867804092) < 1e-12);
    CHECK(std::abs(f.M(1, 1) + 0.47796277354632943) < 1e-12);

    const CompactGradients g = compute_compact_gradients(j, p);
    CHECK(std::abs(g.grad_B(0, 0) + 0.069952612118766563) < 1e-12);
    CHECK(std::abs(g.grad_B(0, 1) + 0.021844668922454654) < 1e-12);
    CHECK(std::abs(g.grad_B(1, 0) - 0.020323222962494199) < 1e-12);
    CHECK(std::abs(g.grad_B(1, 1) - 0.045459772947005216) < 1e-12);
    CHECK((g.grad_A - f.M).norm() == 0.0);
}

TEST_CASE("gradient of B on the centre line") {
    const auto spec = FieldSpec::double_gyre();
    const MRParams p = derive_params(0.5, 0.5, 100.0, v2(0.0, -1.0));
    const FieldJet j = eval_jet(spec, v2(1.0, 0.5), 0.0);
    const CompactFields f = compute_compact_fields(j, p);
    check_vec(f.B, {0.0, -0.25}, 1e-14);
    const CompactGradients g = compute_compact_gradients(j, p);
    CHECK(std::abs(g.grad_B(0, 0) + 0.11546727567297230) < 1e-12);
    CHECK(std::abs(g.grad_B(0, 1) + 0.035204867388232556) < 1e-12);
    CHECK(std::abs(g.grad_B(1, 0) - 0.037622676325220728) < 1e-12);
    CHECK(std::abs(g.grad_B(1, 1) - 0.11546727567297230) < 1e-12);
}

TEST_CASE("analytic jets agree with central differences") {
    for (const auto& spec : {FieldSpec::double_gyre(), FieldSpec::taylor_green(2), FieldSpec::taylor_green(3)}) {
        const auto rep = jet_consistency_check(spec, 20, 1e-4);
        CHECK(rep.worst() < 1e-6);
        CHECK(rep.laplacian_trace_error < 1e-12);
    }
}

TEST_CASE("Taylor-Green Laplacian is an eigenfunction") {
    const TaylorGreenParams tp{};
    Vec x(3);
    x << 0.3, 0.7, 0.2;
    const FieldJet j3 = eval_jet(FieldSpec::taylor_green(3, tp), x, 0.4);
    CHECK((j3.lap_u + 3.0 * tp.k * tp.k * j3.u).norm() < 1e-12);
    const FieldJet j2 = eval_jet(FieldSpec::taylor_green(2, tp), v2(0.3, 0.7), 0.4);
    CHECK((j2.lap_u + 2.0 * tp.k * tp.k * j2.u).norm() < 1e-12);
    CHECK(std::abs(j2.grad_u.trace()) < 1e-14);
}

TEST_CASE("linear field has constant M and vanishing dM") {
    Mat S(2, 2);
    S << 0.3, 1.0, -0.5, -0.3;
    const auto spec = FieldSpec::linear(S);
    const MRParams p = derive_params(0.5, 0.5, 10.0, v2(0.0, 0.0));
    const FieldJet j = eval_jet(spec, v2(0.4, -1.3), 2.0);
    const CompactGradients g = compute_compact_gradients(j, p);
    CHECK((g.grad_A - S).norm() == 0.0);
    CHECK(g.dM[0].norm() == 0.0);
    CHECK(g.dM[1].norm() == 0.0);
    CHECK(l_matrix(g, v2(3.0, -2.0)).norm() == 0.0);
}

TEST_CASE("L matrix is linear in w") {
    const auto spec = FieldSpec::double_gyre();
    const MRParams p = derive_params(0.5, 0.5, 100.0, v2(0.0, 0.0));
    const CompactGradients g = compute_compact_gradients(eval_jet(spec, v2(0.7, 0.2), 1.1), p);
    const Vec w = v2(0.3, -0.8);
    CHECK((l_matrix(g, 2.5 * w) - 2.5 * l_matrix(g, w)).norm() <= 1e-15 * l_matrix(g, w).norm() * 10);
    CHECK(l_matrix(g, v2(0.0, 0.0)).norm() == 0.0);
}

TEST_CASE("A and M are linear in the field; B couples bilinearly through the Faxen term") {
    // u1 = double gyre, u2 = Taylor-Green; A and M of u1 + u2 are sums, B picks up -c (M1 lap2 + M2 lap1).
    const MRParams p = derive_params(0.6, 0.3, 20.0, v2(0.0, 0.0));
    const double c = p.faxen();
    const FieldJet j1 = eval_jet(FieldSpec::double_gyre(), v2(0.7, 0.2), 1.1);
    const FieldJet j2 = eval_jet(FieldSpec::taylor_green(2), v2(0.7, 0.2), 1.1);
    FieldJet s = j1;
    s.u = j1.u + j2.u;
    s.grad_u = j1.grad_u + j2.grad_u;
    s.lap_u = j1.lap_u + j2.lap_u;
    s.grad_lap_u = j1.grad_lap_u + j2.grad_lap_u;
    // material derivatives are nonlinear in u; use the exact combination
    s.du_dt_material = j1.du_dt + j2.du_dt + s.grad_u * s.u;
    s.dlap_dt_material = j1.dlap_dt + j2.dlap_dt + s.grad_lap_u * s.u;
    const CompactFields f1 = compute_compact_fields(j1, p);
    const CompactFields f2 = compute_compact_fields(j2, p);
    const CompactFields fs = compute_compact_fields(s, p);
    CHECK((fs.A - f1.A - f2.A).norm() < 1e-14);
    CHECK((fs.M - f1.M - f2.M).norm() < 1e-14);
    // B minus its material-derivative part is quadratic: check the cross term.
    auto faxen_part = [&](const CompactFields& f, const FieldJet& j) { return Vec(-c * (f.M * j.lap_u)); };
    const Vec cross = faxen_part(fs, s) - faxen_part(f1, j1) - faxen_part(f2, j2);
    const Vec expected = -c * (f1.M * j2.lap_u + f2.M * j1.lap_u);
    CHECK((cross - expected).norm() < 1e-13);
}

TEST_CASE("field validation") {
    CHECK_THROWS_AS(FieldSpec::quiescent(4), ValidationError);
    const Box box{v2(0.0, 0.0), v2(1.0, 1.0)};
    const auto spec = FieldSpec::double_gyre().with_domain(box);
    CHECK_THROWS_AS(eval_jet(spec, v2(1.5, 0.5), 0.0), DomainError);
    CHECK_NOTHROW(eval_jet(spec, v2(0.5, 0.5), 0.0));
}

TEST_CASE("bounds are deterministic and cover sampled values") {
    const auto spec = FieldSpec::double_gyre();
    const MRParams p = derive_params(0.5, 0.5, 100.0, v2(0.0, -1.0));
    const Box box = spec.sampling_box(1.0);
    const auto b1 = estimate_bounds(spec, p, box, {0.0, 1.0}, 512, 42);
    const auto b2 = estimate_bounds(spec, p, box, {0.0, 1.0}, 512, 42);
    CHECK(b1.L_b == b2.L_b);
    CHECK(b1.L_c == b2.L_c);
    CHECK(b1.L_b == doctest::Approx(1.5 * b1.raw_L_b));
    const CompactFields f = eval_compact(spec, p, v2(1.0, 0.5), 0.0);
    CHECK(f.B.norm() <= b1.L_b);
    const auto q = estimate_bounds(FieldSpec::quiescent(2), derive_params(0.5, 0.5, 1.0, v2(0, 0)),
                                   Box{v2(-1, -1), v2(1, 1)}, {0.0, 1.0}, 64, 42);
    CHECK(q.L_b == 0.0);
    CHECK(q.L_c == 0.0);
}

TEST_CASE("compact form reproduces the original non-memory acceleration") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    struct Case {
        FieldSpec spec;
        MRParams p;
    };
    Vec g3(3);
    g3 << 0.2, -1.0, 0.4;
    const std::vector<Case> cases = {{FieldSpec::double_gyre(), derive_params(0.5, 0.5, 100.0, v2(0, -1))},
                                     {FieldSpec::taylor_green(3), derive_params(1.4, 0.3, 2.0, g3)}};
    for (const auto& c : cases) {
        const int n = c.spec.dimension();
        const double cf = c.p.faxen();
        double worst = 0.0;
        for (int k = 0; k < 100; ++k) {
            Vec y(n), v(n);
            for (int i = 0; i < n; ++i) {
                y[i] = c.spec.kind() == FieldKind::double_gyre ? (i == 0 ? 1.0 + U(rng) : 0.5 + 0.5 * U(rng)) : U(rng);
                v[i] = U(rng);
            }
            const double t = 5.0 * (1.0 + U(rng));
            const FieldJet j = eval_jet(c.spec, y, t);
            // (R/2) D/Dt (3u + (gamma/10) mu^-1 lap u) + (1 - 3R/2) g - mu (v - u - (gamma/6) mu^-1 lap u)
            const Vec original = 1.5 * c.p.R * j.du_dt_material +
                                 c.p.R * c.p.gamma / (20.0 * c.p.mu) * j.dlap_dt_material +
                                 (1.0 - 1.5 * c.p.R) * c.p.g - c.p.mu * (v - j.u - cf * j.lap_u);
            const Vec w = velocity_to_w(y, v, t, c.spec, c.p);
            const Vec wdot = compact_rhs(y, w, t, Vec::Zero(n), c.spec, c.p).wdot;
            const Vec dA_dt = j.du_dt + cf * j.dlap_dt + (j.grad_u + cf * j.grad_lap_u) * v;
            worst = std::max(worst, (wdot + dA_dt - original).norm() / std::max(original.norm(), 1e-300));
        }
        CHECK(worst <= 1e-10);
    }
}
