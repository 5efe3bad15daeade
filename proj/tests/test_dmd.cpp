#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "modalkit/dmd.hpp"
#include "modalkit/modal.hpp"
#include "modalkit/synth.hpp"
#include "support/oracles.hpp"

using namespace modalkit;

namespace {

DmdOptions augmented_full_rank() {
    DmdOptions options;
    options.augment = true;
    options.truncation = TruncationPolicy::full_rank();
    return options;
}

} // namespace

TEST_CASE("oscillator benchmark yields the published eigenvalue pair") {
    const BenchmarkData bench = make_benchmark("sdof-paper");
    const DmdResult result = dmd_decompose(bench.snapshots, augmented_full_rank());
    REQUIRE(result.mode_count() == 2);

    const SdofParams params = sdof_benchmark_params();
    const Complex s_exact(-params.damping_ratio() * params.natural_frequency_rad(),
                          params.damped_frequency_rad());
    const Complex mu_exact = std::exp(s_exact * bench.snapshots.dt);

    Complex mu = result.discrete_eigs(0);
    if (mu.imag() < 0.0) mu = result.discrete_eigs(1);
    CHECK(std::abs(mu - mu_exact) < 1e-10);
    // the published 4-digit value was sampled with both interval endpoints
    // included (dt = 1/1023); at dt = 1/1024 it agrees to ~3e-4
    CHECK(std::abs(mu - Complex(0.9503, 0.3014)) < 5e-4);
    CHECK(std::abs(mu) == Catch::Approx(0.9969).margin(5e-5));

    CHECK(result.frequencies_hz(0) == Catch::Approx(50.0).epsilon(1e-10));
    CHECK(result.damping_ratios(0) == Catch::Approx(0.01).epsilon(1e-10));
}

TEST_CASE("a constant series is a fixed point of the propagator") {
    Eigen::MatrixXd data(2, 6);
    for (Eigen::Index j = 0; j < 6; ++j) {
        data(0, j) = 3.0;
        data(1, j) = -1.0;
    }
    const SnapshotMatrix snap(std::move(data), 0.1);
    const DmdResult result = dmd_decompose(build_pair(snap, false), DmdOptions{});
    REQUIRE(result.mode_count() == 1);
    CHECK(std::abs(result.discrete_eigs(0) - Complex(1.0, 0.0)) < 1e-12);
    Eigen::VectorXcd direction(2);
    direction << 3.0, -1.0;
    CHECK(mac(result.modes.col(0), direction) > 1.0 - 1e-12);
}

TEST_CASE("snapshots of a known propagator recover its spectrum") {
    Eigen::MatrixXd propagator(3, 3);
    propagator << 0.9, 0.1, 0.0, -0.2, 0.8, 0.05, 0.0, -0.1, 0.7;
    Eigen::MatrixXd data(3, 40);
    data.col(0) << 1.0, -0.5, 0.25;
    for (Eigen::Index j = 1; j < 40; ++j) data.col(j) = propagator * data.col(j - 1);
    const SnapshotMatrix snap(std::move(data), 0.01);

    const DmdResult result = dmd_decompose(build_pair(snap, false), DmdOptions{});
    const EigenPairs reference = eig_general(propagator);
    REQUIRE(result.mode_count() == reference.size());
    for (int i = 0; i < reference.size(); ++i) {
        double best = 1e300;
        for (int j = 0; j < result.mode_count(); ++j)
            best = std::min(best, std::abs(result.discrete_eigs(j) - reference.values(i)));
        CHECK(best < 1e-8);
    }
}

TEST_CASE("displacement-only data needs augmentation to expose the pair") {
    const BenchmarkData bench = make_benchmark("sdof-paper");

    DmdOptions plain;
    plain.augment = false;
    const DmdResult without = dmd_decompose(bench.snapshots, plain);
    REQUIRE(without.mode_count() == 1);
    CHECK(without.discrete_eigs(0).imag() == 0.0);

    const DmdResult with = dmd_decompose(bench.snapshots, augmented_full_rank());
    REQUIRE(with.mode_count() == 2);
    CHECK(with.discrete_eigs(0).imag() != 0.0);
    CHECK(with.frequencies_hz(0) == Catch::Approx(50.0).epsilon(1e-9));
}

TEST_CASE("discrete_to_continuous reproduces published modal parameters") {
    const ContinuousPole pole = discrete_to_continuous(Complex(0.9503, 0.3014), 1.0 / 1024.0);
    CHECK(pole.frequency_hz == Catch::Approx(50.0).epsilon(2e-3));
    CHECK(pole.damping_ratio == Catch::Approx(0.01).epsilon(1e-2));
    CHECK_FALSE(pole.nyquist_ambiguous);
}

TEST_CASE("discrete_to_continuous handles unit and real eigenvalues") {
    const ContinuousPole unit = discrete_to_continuous(Complex(1.0, 0.0), 0.5);
    CHECK(unit.s == Complex(0.0, 0.0));
    CHECK(unit.frequency_hz == 0.0);
    CHECK(std::isnan(unit.damping_ratio));

    const ContinuousPole decay = discrete_to_continuous(Complex(std::exp(-1.0), 0.0), 1.0);
    CHECK(decay.s.real() == Catch::Approx(-1.0));
    CHECK(decay.s.imag() == 0.0);
    CHECK(decay.frequency_hz == Catch::Approx(1.0 / two_pi));
    CHECK(decay.damping_ratio == Catch::Approx(1.0));
    CHECK_FALSE(decay.nyquist_ambiguous);
}

TEST_CASE("discrete_to_continuous flags and rejects degenerate eigenvalues") {
    CHECK(discrete_to_continuous(Complex(-0.5, 0.0), 1.0).nyquist_ambiguous);
    CHECK_THROWS_MATCHES(discrete_to_continuous(Complex(0.0, 0.0), 1.0), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == errc::singular_eigenvalue;
                         }));
}

TEST_CASE("reconstruction reproduces the record") {
    const BenchmarkData bench = make_benchmark("sdof-paper");
    const DmdResult result = dmd_decompose(bench.snapshots, augmented_full_rank());

    const Reconstruction first = reconstruct(result, 0);
    CHECK(std::abs(first.values(0) - bench.snapshots.data(0, 0)) < 1e-9);

    const SdofParams params = sdof_benchmark_params();
    const double t512 = 512.0 * bench.snapshots.dt;
    const double exact = sdof_response(params, Eigen::VectorXd::Constant(1, t512))(0);
    const Reconstruction mid = reconstruct(result, 512);
    CHECK(std::abs(mid.values(0) - exact) < 1e-6 * std::abs(exact));
    CHECK(mid.imag_residual < 1e-6);
}

TEST_CASE("full-rank reconstruction error stays below 1e-6 everywhere") {
    const MdofSystem system = chain6_benchmark_system();
    const ModalGroundTruth truth = modal_ground_truth(system);
    Eigen::VectorXd times(200);
    for (int j = 0; j < 200; ++j) times(j) = 0.5 * j;
    // subtract the static deflection so the record is an exact trajectory
    // of a rank-12 propagator
    Eigen::MatrixXd data = mdof_step_response(system, truth, times);
    data.colwise() -= Eigen::VectorXd(
        system.stiffness.fullPivLu().solve(system.force_pattern));
    const SnapshotMatrix snap(std::move(data), 0.5);

    const DmdResult result = dmd_decompose(snap, augmented_full_rank());
    const double scale = snap.data.norm();
    for (long k = 0; k < 198; ++k) {
        const Reconstruction rec = reconstruct(result, k);
        CHECK((rec.values - snap.data.col(k)).norm() < 1e-6 * scale);
    }
}

TEST_CASE("propagator eigenvalues match the direct pseudo-inverse route") {
    const MdofSystem system = chain6_benchmark_system();
    const ModalGroundTruth truth = modal_ground_truth(system);
    Eigen::VectorXd times(400);
    for (int j = 0; j < 400; ++j) times(j) = 0.5 * j;
    SnapshotMatrix snap(mdof_step_response(system, truth, times), 0.5);
    snap = remove_mean(snap);
    const SnapshotPair pair = build_pair(snap, true);

    const DmdResult result = dmd_decompose(pair, augmented_full_rank());

    // direct route: eigenvalues of Y X^+ without the projected operator
    const auto svd = svd_truncate(pair.x, TruncationPolicy::full_rank());
    const Eigen::MatrixXd propagator = pair.y * pseudo_inverse(svd);
    const EigenPairs direct = eig_general(propagator);

    for (int i = 0; i < result.mode_count(); ++i) {
        double best = 1e300;
        for (int j = 0; j < direct.size(); ++j)
            best = std::min(best, std::abs(direct.values(j) - result.discrete_eigs(i)));
        CHECK(best < 1e-8);
    }
}

TEST_CASE("real records produce conjugate-closed spectra and modes") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Eigen::MatrixXd data = oracles::random_matrix(4, 30, 700 + seed);
        const SnapshotMatrix snap(data, 0.1);
        const DmdResult result = dmd_decompose(build_pair(snap, false), DmdOptions{});
        for (int i = 0; i < result.mode_count(); ++i) {
            if (result.discrete_eigs(i).imag() == 0.0) continue;
            double best_value = 1e300;
            int partner = -1;
            for (int j = 0; j < result.mode_count(); ++j) {
                const double d =
                    std::abs(result.discrete_eigs(j) - std::conj(result.discrete_eigs(i)));
                if (d < best_value) {
                    best_value = d;
                    partner = j;
                }
            }
            REQUIRE(partner >= 0);
            CHECK(best_value < 1e-10);
            CHECK((result.modes.col(partner) - result.modes.col(i).conjugate()).norm() <
                  1e-8);
        }
    }
}

TEST_CASE("noiseless damped data stays inside the unit circle") {
    const BenchmarkData sdof = make_benchmark("sdof-paper");
    const DmdResult r1 = dmd_decompose(sdof.snapshots, augmented_full_rank());
    for (int i = 0; i < r1.mode_count(); ++i)
        CHECK(std::abs(r1.discrete_eigs(i)) <= 1.0 + 1e-6);

    BenchmarkData chain = make_benchmark("chain6-paper");
    chain.snapshots = remove_mean(chain.snapshots);
    const DmdResult r2 = dmd_decompose(chain.snapshots, augmented_full_rank());
    for (int i = 0; i < r2.mode_count(); ++i)
        CHECK(std::abs(r2.discrete_eigs(i)) <= 1.0 + 1e-6);
}

TEST_CASE("thresholded poles persist when the threshold tightens") {
    BenchmarkData chain = make_benchmark("chain6-paper");
    chain.snapshots = remove_mean(inject_noise(chain.snapshots, 1e-4, 3));

    DmdOptions loose = augmented_full_rank();
    loose.truncation = TruncationPolicy::relative_threshold(1e-2);
    DmdOptions tight = loose;
    tight.truncation = TruncationPolicy::relative_threshold(1e-3);

    const DmdResult coarse = dmd_decompose(chain.snapshots, loose);
    const DmdResult fine = dmd_decompose(chain.snapshots, tight);

    const ModalGroundTruth truth = modal_ground_truth(chain6_benchmark_system());
    for (int i = 0; i < coarse.mode_count(); ++i) {
        if (!(coarse.continuous_eigs(i).imag() > 0.0)) continue;
        const double f = coarse.frequencies_hz(i);
        bool physical = false;
        for (int t = 0; t < truth.frequencies_hz.size(); ++t)
            if (std::abs(f - truth.frequencies_hz(t)) <= 0.01 * truth.frequencies_hz(t))
                physical = true;
        if (!physical) continue;
        double best = 1e300;
        for (int j = 0; j < fine.mode_count(); ++j)
            best = std::min(best, std::abs(fine.frequencies_hz(j) - f));
        CHECK(best <= 0.01 * f);
    }
}

TEST_CASE("zero snapshots carry no signal") {
    Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(2, 10);
    const SnapshotMatrix snap(std::move(zeros), 0.1);
    CHECK_THROWS_MATCHES(dmd_decompose(build_pair(snap, false), DmdOptions{}), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == errc::no_signal;
                         }));
}

TEST_CASE("amplitude ordering ranks dominant content first") {
    const MdofSystem system = chain6_benchmark_system();
    const ModalGroundTruth truth = modal_ground_truth(system);
    Eigen::VectorXd times(300);
    for (int j = 0; j < 300; ++j) times(j) = 0.5 * j;
    SnapshotMatrix snap(mdof_step_response(system, truth, times), 0.5);
    snap = remove_mean(snap);

    DmdOptions options = augmented_full_rank();
    options.sort = DmdOptions::Sort::by_amplitude;
    const DmdResult result = dmd_decompose(snap, options);
    for (int i = 0; i + 1 < result.mode_count(); ++i)
        CHECK(std::abs(result.initial_amplitudes(i)) >=
              std::abs(result.initial_amplitudes(i + 1)) - 1e-12);
    // the lowest mode dominates a step response
    CHECK(result.frequencies_hz(0) ==
          Catch::Approx(truth.frequencies_hz(0)).epsilon(1e-3));
}
