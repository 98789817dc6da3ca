#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "btm/surrogate.hpp"
#include "oracles.hpp"

using namespace btm;

namespace {

// l(theta) = |theta - target|^2; deterministic, gradient 2 (theta - target).
class QuadraticPathLoss final : public PathLoss {
  public:
    explicit QuadraticPathLoss(Vector target) : target_(std::move(target)) {}
    double full_loss(const Vector& theta) const override {
        return norm_sq(sub(theta, target_));
    }
    double sample_loss_grad(const Vector& theta, Rng&, Vector& grad_out) const override {
        grad_out = scaled(sub(theta, target_), 2.0);
        return full_loss(theta);
    }

  private:
    Vector target_;
};

BezierSurrogate random_surrogate(std::size_t dim, Rng& rng) {
    BezierSurrogate s;
    s.theta0.resize(dim);
    s.control.resize(dim);
    s.thetaT.resize(dim);
    for (double& v : s.theta0) v = rng.normal();
    for (double& v : s.control) v = rng.normal();
    for (double& v : s.thetaT) v = rng.normal();
    return s;
}

Batch make_blobs(std::size_t n, Rng& rng) {
    Batch b;
    b.x = Matrix(n, 2);
    b.y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool pos = i % 2 == 0;
        b.y[i] = pos ? 1.0 : 0.0;
        b.x(i, 0) = (pos ? 2.0 : -2.0) + rng.normal();
        b.x(i, 1) = (pos ? 2.0 : -2.0) + rng.normal();
    }
    return b;
}

}  // namespace

TEST_CASE("curve interpolates its endpoints exactly") {
    Rng rng(3);
    BezierSurrogate s = random_surrogate(6, rng);
    CHECK(eval_curve(s, 0.0) == s.theta0);
    CHECK(eval_curve(s, 1.0) == s.thetaT);
    CHECK_THROWS_AS(eval_curve(s, -0.01), DomainError);
    CHECK_THROWS_AS(eval_curve(s, 1.01), DomainError);
}

TEST_CASE("midpoint control point recovers the straight line") {
    Rng rng(5);
    BezierSurrogate s = linear_surrogate(random_surrogate(8, rng).theta0,
                                         random_surrogate(8, rng).thetaT);
    for (int i = 0; i <= 20; ++i) {
        const double t = i / 20.0;
        const Vector on_curve = eval_curve(s, t);
        for (std::size_t k = 0; k < s.dim(); ++k) {
            const double chord = (1.0 - t) * s.theta0[k] + t * s.thetaT[k];
            CHECK(std::abs(on_curve[k] - chord) < 1e-12);
        }
    }
    CHECK(curvature_kappa(s) < 1e-12);
}

TEST_CASE("scalar curve value") {
    BezierSurrogate s{{0.0}, {1.0}, {1.0}};
    CHECK(eval_curve(s, 0.5)[0] == doctest::Approx(0.75).epsilon(1e-15));
}

TEST_CASE("segment displacement closed form") {
    Rng rng(7);
    BezierSurrogate s = random_surrogate(10, rng);

    // Full segment: the bend coefficient vanishes.
    CHECK(segment_displacement(s, 0.0, 1.0) == sub(s.thetaT, s.theta0));

    BezierSurrogate lin = linear_surrogate(s.theta0, s.thetaT);
    Vector d = segment_displacement(lin, 0.25, 0.65);
    for (std::size_t k = 0; k < s.dim(); ++k)
        CHECK(std::abs(d[k] - 0.4 * (s.thetaT[k] - s.theta0[k])) < 1e-12);

    for (int trial = 0; trial < 20; ++trial) {
        double a = rng.uniform(), b = rng.uniform();
        if (a > b) std::swap(a, b);
        if (a == b) continue;
        const Vector closed = segment_displacement(s, a, b);
        const Vector direct = sub(eval_curve(s, b), eval_curve(s, a));
        CHECK(norm(sub(closed, direct)) < 1e-12);
    }

    CHECK_THROWS_AS(segment_displacement(s, 0.5, 0.5), DomainError);
    CHECK_THROWS_AS(segment_displacement(s, 0.7, 0.2), DomainError);
}

TEST_CASE("chord deviation law holds pointwise") {
    Rng rng(11);
    BezierSurrogate s = random_surrogate(12, rng);
    const double kappa = curvature_kappa(s);
    for (int i = 0; i <= 1000; ++i) {
        const double t = i / 1000.0;
        Vector c(s.dim());
        for (std::size_t k = 0; k < s.dim(); ++k)
            c[k] = (1.0 - t) * s.theta0[k] + t * s.thetaT[k];
        const double dev = norm(sub(eval_curve(s, t), c));
        const double law = t * (1.0 - t) * kappa / 2.0;
        CHECK(std::abs(dev - law) <= 1e-10 * (1.0 + law));
    }
}

TEST_CASE("chord report on the scalar example") {
    BezierSurrogate s{{0.0}, {1.0}, {1.0}};
    Trajectory teacher;
    teacher.checkpoints = {{0.0}, {0.5}, {1.0}};  // straight line
    ChordReport rep = chord_report(s, teacher, 1001);
    CHECK(rep.kappa == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(rep.max_chord_deviation == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(rep.argmax_t == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(rep.teacher_deviation <= 1e-12);
    CHECK(std::abs(rep.max_chord_deviation - rep.kappa / 8.0) <= 1e-10 * rep.kappa);
}

TEST_CASE("chord report of the midpoint surrogate is identically zero") {
    Rng rng(13);
    Vector a(5), b(5);
    for (double& v : a) v = rng.normal();
    for (double& v : b) v = rng.normal();
    BezierSurrogate s = linear_surrogate(a, b);
    Trajectory teacher;
    teacher.checkpoints = {a, b};
    ChordReport rep = chord_report(s, teacher, 101);
    CHECK(rep.kappa < 1e-12);
    CHECK(rep.max_chord_deviation < 1e-12);
}

TEST_CASE("path-integral coefficients match quadrature") {
    // Bernstein-squared moments behind the closed-form control point.
    CHECK(std::abs(oracles::simpson01([](double t) { return (1 - t) * (1 - t); }) - 1.0 / 3.0) <
          1e-10);
    CHECK(std::abs(oracles::simpson01([](double t) {
              const double w = 2 * t * (1 - t);
              return w * w;
          }) - 2.0 / 15.0) < 1e-10);
    CHECK(std::abs(oracles::simpson01([](double t) {
              return 2 * t * (1 - t) * (1 - t) * (1 - t);
          }) - 1.0 / 10.0) < 1e-10);

    // The minimizer of the quadratic path integral, derived from those
    // coefficients: phi* = (5/2) target - (3/4)(theta0 + thetaT). Check it
    // by direct quadrature minimization along random directions.
    Rng rng(17);
    const std::size_t dim = 4;
    Vector theta0(dim), thetaT(dim), target(dim);
    for (double& v : theta0) v = rng.normal();
    for (double& v : thetaT) v = rng.normal();
    for (double& v : target) v = rng.normal();
    Vector phi_star(dim);
    for (std::size_t k = 0; k < dim; ++k)
        phi_star[k] = 2.5 * target[k] - 0.75 * (theta0[k] + thetaT[k]);

    auto path_integral = [&](const Vector& phi) {
        BezierSurrogate s{theta0, phi, thetaT};
        return oracles::simpson01([&](double t) {
            return norm_sq(sub(eval_curve(s, t), target));
        });
    };
    const double at_star = path_integral(phi_star);
    for (int trial = 0; trial < 5; ++trial) {
        Vector perturbed = phi_star;
        for (double& v : perturbed) v += 1e-3 * rng.normal();
        CHECK(path_integral(perturbed) >= at_star - 1e-12);
    }
}

TEST_CASE("control point optimization reaches the quadratic-landscape optimum") {
    Rng rng(19);
    const std::size_t dim = 5;
    Vector theta0(dim), thetaT(dim), target(dim, 0.0);
    for (double& v : theta0) v = 0.2 * rng.normal();
    for (double& v : thetaT) v = 0.2 * rng.normal();
    QuadraticPathLoss objective(target);

    ControlPointOpts opts;
    opts.lr = 1e-2;
    opts.max_iters = 6000;   // the default 300-step budget cannot reach 1e-3:
    opts.mc_samples = 2000;  // contraction per step is only 1 - lr * 4/15
    opts.seed = 23;
    ControlPointResult res = optimize_control_point(theta0, thetaT, objective, opts);

    Vector phi_star(dim);
    for (std::size_t k = 0; k < dim; ++k)
        phi_star[k] = 2.5 * target[k] - 0.75 * (theta0[k] + thetaT[k]);
    CHECK(norm(sub(res.surrogate.control, phi_star)) < 1e-3);
    CHECK(res.end_grid_loss <= res.start_grid_loss);
}

TEST_CASE("coincident endpoints at the optimum keep the control point fixed") {
    Vector star{0.4, -0.2, 1.1};
    QuadraticPathLoss objective(star);
    ControlPointOpts opts;
    ControlPointResult res = optimize_control_point(star, star, objective, opts);
    CHECK(res.reached_grad_tol);
    CHECK(norm(sub(res.surrogate.control, star)) == 0.0);
}

TEST_CASE("optimized surrogate beats the midpoint path on blobs") {
    Rng rng(29);
    Batch data = make_blobs(200, rng);
    const MlpConfig model{2, 8, 0.0};

    TeacherConfig tc;
    tc.epochs = 20;
    tc.lr = 0.1;
    tc.momentum = 0.9;
    tc.batch_size = 32;
    tc.seed = 31;
    Trajectory teacher = train_teacher(data, tc, model);

    ControlPointOpts opts;
    opts.seed = 37;
    ControlPointResult res = optimize_control_point(teacher.checkpoints.front(),
                                                    teacher.checkpoints.back(), data, model,
                                                    opts);
    CHECK(res.end_grid_loss <= res.start_grid_loss);
    CHECK(res.end_grid_loss < res.start_grid_loss);  // strictly better than linear

    MlpPathLoss objective(model, data, opts.batch_size);
    const double linear_grid =
        grid_mean_path_loss(objective,
                            linear_surrogate(teacher.checkpoints.front(),
                                             teacher.checkpoints.back()),
                            opts.grid_points);
    CHECK(res.end_grid_loss < linear_grid);
}

TEST_CASE("fidelity geometry: student path on the surrogate collapses the bound") {
    Rng rng(41);
    BezierSurrogate s = random_surrogate(6, rng);
    Trajectory teacher;
    for (int i = 0; i <= 4; ++i) {
        Vector ck(6);
        for (double& v : ck) v = rng.normal();
        teacher.checkpoints.push_back(ck);
    }
    teacher.checkpoints.front() = s.theta0;
    teacher.checkpoints.back() = s.thetaT;

    std::vector<Vector> student;
    for (int i = 0; i <= 1000; ++i) student.push_back(eval_curve(s, i / 1000.0));

    FidelityReport rep = verify_fidelity_geometry(s, teacher, student);
    CHECK(rep.eps_syn <= 1e-12);
    CHECK(rep.triangle_bound_holds);
    CHECK(rep.composite_bound_holds);
    CHECK(std::abs(rep.sup_student_teacher - rep.sup_surrogate_teacher) <= 1e-9);
}

TEST_CASE("fidelity geometry: straight teacher with midpoint control is all zeros") {
    Vector a{1.0, 2.0}, b{3.0, -1.0};
    BezierSurrogate s = linear_surrogate(a, b);
    Trajectory teacher;
    teacher.checkpoints = {a, Vector{2.0, 0.5}, b};  // exact midpoint chord point
    std::vector<Vector> student;
    for (int i = 0; i <= 4; ++i) student.push_back(eval_curve(s, i / 4.0));
    FidelityReport rep = verify_fidelity_geometry(s, teacher, student);
    CHECK(rep.kappa < 1e-12);
    CHECK(rep.teacher_deviation < 1e-12);
    CHECK(rep.sup_surrogate_teacher < 1e-12);
    CHECK(rep.sup_student_teacher < 1e-12);
}

TEST_CASE("fidelity bounds hold for arbitrary student paths") {
    Rng rng(43);
    for (int trial = 0; trial < 5; ++trial) {
        BezierSurrogate s = random_surrogate(8, rng);
        Trajectory teacher;
        for (int i = 0; i <= 5; ++i) {
            Vector ck(8);
            for (double& v : ck) v = rng.normal();
            teacher.checkpoints.push_back(ck);
        }
        teacher.checkpoints.front() = s.theta0;
        teacher.checkpoints.back() = s.thetaT;
        std::vector<Vector> student;
        for (int i = 0; i <= 7; ++i) {
            Vector p(8);
            for (double& v : p) v = rng.normal();
            student.push_back(p);
        }
        FidelityReport rep = verify_fidelity_geometry(s, teacher, student);
        CHECK(rep.triangle_bound_holds);
        CHECK(rep.composite_bound_holds);
    }
    CHECK_THROWS_AS(
        verify_fidelity_geometry(random_surrogate(4, rng), Trajectory{{Vector(4, 0.0)}}, {}),
        InvalidInput);
}

TEST_CASE("curvature profile") {
    Trajectory collinear;
    for (int i = 0; i <= 4; ++i) collinear.checkpoints.push_back({0.5 * i, -0.5 * i});
    for (double h : curvature_profile(collinear)) CHECK(h < 1e-12);

    Trajectory vee;
    vee.checkpoints = {{0.0}, {1.0}, {0.0}};
    Vector prof = curvature_profile(vee);
    REQUIRE(prof.size() == 1);
    CHECK(prof[0] == doctest::Approx(2.0).epsilon(1e-15));

    Trajectory tiny;
    tiny.checkpoints = {{0.0}, {1.0}};
    CHECK_THROWS_AS(curvature_profile(tiny), InvalidInput);
}

TEST_CASE("surrogate file round-trip") {
    Rng rng(47);
    BezierSurrogate s = random_surrogate(9, rng);
    const std::string path =
        (std::filesystem::temp_directory_path() / "btm_surrogate_roundtrip.btmb").string();
    save_surrogate(s, path);
    CHECK(std::filesystem::file_size(path) == 4 + 4 + 8 + 3 * 8 * 9);
    BezierSurrogate loaded = load_surrogate(path);
    CHECK(loaded.theta0 == s.theta0);
    CHECK(loaded.control == s.control);
    CHECK(loaded.thetaT == s.thetaT);

    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.write("NOPE", 4);
    f.close();
    CHECK_THROWS_AS(load_surrogate(path), FormatError);
    std::remove(path.c_str());
}
