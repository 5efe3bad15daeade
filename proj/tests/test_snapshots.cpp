#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "modalkit/io.hpp"
#include "modalkit/snapshots.hpp"
#include "modalkit/synth.hpp"
#include "support/oracles.hpp"

using namespace modalkit;

namespace {

SnapshotMatrix series_1x(const std::vector<double>& values, double dt = 0.1) {
    Eigen::MatrixXd data(1, static_cast<Eigen::Index>(values.size()));
    for (std::size_t j = 0; j < values.size(); ++j)
        data(0, static_cast<Eigen::Index>(j)) = values[j];
    return SnapshotMatrix(std::move(data), dt);
}

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string& content) {
        path = std::filesystem::temp_directory_path() /
               ("modalkit_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++) + ".csv");
        std::ofstream out(path);
        out << content;
    }
    ~TempFile() { std::filesystem::remove(path); }
    static int counter;
};
int TempFile::counter = 0;

} // namespace

TEST_CASE("build_pair without augmentation shifts by one sample") {
    const SnapshotMatrix snap = series_1x({1, 2, 3, 4});
    const SnapshotPair pair = build_pair(snap, false);
    REQUIRE(pair.x.rows() == 1);
    REQUIRE(pair.x.cols() == 3);
    CHECK(pair.x(0, 0) == 1);
    CHECK(pair.x(0, 1) == 2);
    CHECK(pair.x(0, 2) == 3);
    CHECK(pair.y(0, 0) == 2);
    CHECK(pair.y(0, 1) == 3);
    CHECK(pair.y(0, 2) == 4);
}

TEST_CASE("build_pair with augmentation stacks the shifted copy") {
    const SnapshotMatrix snap = series_1x({1, 2, 3, 4});
    const SnapshotPair pair = build_pair(snap, true);
    REQUIRE(pair.x.rows() == 2);
    REQUIRE(pair.x.cols() == 2);
    Eigen::MatrixXd x_expected(2, 2), y_expected(2, 2);
    x_expected << 1, 2, 2, 3;
    y_expected << 2, 3, 3, 4;
    CHECK(pair.x == x_expected);
    CHECK(pair.y == y_expected);
}

TEST_CASE("build_pair shift consistency holds for random data") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Eigen::MatrixXd data = oracles::random_matrix(3, 20, 40 + seed);
        const SnapshotMatrix snap(data, 0.25);

        const SnapshotPair plain = build_pair(snap, false);
        for (Eigen::Index j = 0; j + 1 < plain.x.cols(); ++j)
            CHECK(plain.y.col(j) == plain.x.col(j + 1));

        const SnapshotPair aug = build_pair(snap, true);
        CHECK(aug.x.bottomRows(3) == aug.y.topRows(3));
    }
}

TEST_CASE("build_pair demands enough samples") {
    const SnapshotMatrix snap = series_1x({1, 2, 3});
    CHECK_NOTHROW(build_pair(snap, false));
    CHECK_THROWS_MATCHES(build_pair(snap, true), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == errc::insufficient_data;
                         }));
}

TEST_CASE("decimate keeps every factor-th column and scales dt") {
    const SnapshotMatrix snap = series_1x({1, 2, 3, 4, 5, 6, 7, 8}, 0.5);
    const SnapshotMatrix out = decimate(snap, 2);
    REQUIRE(out.samples() == 4);
    CHECK(out.data(0, 0) == 1);
    CHECK(out.data(0, 1) == 3);
    CHECK(out.data(0, 2) == 5);
    CHECK(out.data(0, 3) == 7);
    CHECK(out.dt == Catch::Approx(1.0));
}

TEST_CASE("decimate by one is the identity") {
    const SnapshotMatrix snap = series_1x({1, 2, 3, 4, 5});
    const SnapshotMatrix out = decimate(snap, 1);
    CHECK(out.data == snap.data);
    CHECK(out.dt == snap.dt);
}

TEST_CASE("decimation composes multiplicatively") {
    const Eigen::MatrixXd data = oracles::random_matrix(2, 64, 9);
    const SnapshotMatrix snap(data, 0.125);
    const SnapshotMatrix ab = decimate(decimate(snap, 2), 3);
    const SnapshotMatrix direct = decimate(snap, 6);
    CHECK(ab.data == direct.data);
    CHECK(ab.dt == Catch::Approx(direct.dt));
}

TEST_CASE("decimating an analytic record equals sampling it slower") {
    const MdofSystem system = chain6_benchmark_system();
    const ModalGroundTruth truth = modal_ground_truth(system);
    Eigen::VectorXd fast_times(64), slow_times(16);
    for (int j = 0; j < 64; ++j) fast_times(j) = 0.5 * j;
    for (int j = 0; j < 16; ++j) slow_times(j) = 2.0 * j;
    const SnapshotMatrix fast(mdof_step_response(system, truth, fast_times), 0.5);
    const SnapshotMatrix slow(mdof_step_response(system, truth, slow_times), 2.0);
    const SnapshotMatrix dec = decimate(fast, 4);
    CHECK((dec.data - slow.data).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(dec.dt == Catch::Approx(slow.dt));
}

TEST_CASE("decimate refuses to leave fewer than four samples") {
    const SnapshotMatrix snap = series_1x({1, 2, 3, 4, 5, 6});
    CHECK_THROWS_MATCHES(decimate(snap, 3), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == errc::insufficient_data;
                         }));
}

TEST_CASE("remove_mean zeroes every channel average") {
    const Eigen::MatrixXd data = oracles::random_matrix(4, 50, 13).array() + 2.5;
    const SnapshotMatrix snap(data, 0.1);
    const SnapshotMatrix centered = remove_mean(snap);
    for (Eigen::Index i = 0; i < centered.channels(); ++i)
        CHECK(std::abs(centered.data.row(i).mean()) < 1e-12);
}

TEST_CASE("slice_window selects the requested span") {
    const SnapshotMatrix snap = series_1x({0, 1, 2, 3, 4, 5, 6, 7, 8, 9}, 1.0);
    const SnapshotMatrix window = slice_window(snap, 3.0, 4.0);
    REQUIRE(window.samples() == 5);
    CHECK(window.data(0, 0) == 3);
    CHECK(window.data(0, 4) == 7);
    CHECK(window.origin_time == Catch::Approx(3.0));
}

TEST_CASE("ingest_csv parses a time column") {
    TempFile file("t,ch1\n0,1\n0.1,2\n0.2,3\n");
    const SnapshotMatrix snap = ingest_csv(file.path.string(),
                                           CsvSchema::with_time_column("t"));
    REQUIRE(snap.channels() == 1);
    REQUIRE(snap.samples() == 3);
    CHECK(snap.dt == Catch::Approx(0.1));
    CHECK(snap.data(0, 2) == 3.0);
    CHECK(snap.channel_labels[0] == "ch1");
}

TEST_CASE("ingest_csv honours a declared dt when no time column exists") {
    TempFile file("a,b\n1,10\n2,20\n3,30\n");
    const SnapshotMatrix snap = ingest_csv(file.path.string(), CsvSchema::with_dt(0.05));
    REQUIRE(snap.channels() == 2);
    CHECK(snap.dt == Catch::Approx(0.05));
    CHECK(snap.data(1, 2) == 30.0);
}

TEST_CASE("ingest_csv rejects jittered time stamps") {
    std::string content = "t,ch1\n";
    double t = 0.0;
    for (int j = 0; j < 20; ++j) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.12f,%d\n", t, j);
        content += buf;
        t += 0.1 * (1.0 + (j % 2 == 0 ? 1e-3 : -1e-3));
    }
    TempFile file(content);
    CHECK_THROWS_MATCHES(ingest_csv(file.path.string(), CsvSchema::with_time_column("t")),
                         Error, Catch::Matchers::Predicate<Error>([](const Error& e) {
                             return e.code() == errc::non_uniform_sampling;
                         }));
}

TEST_CASE("ingest_csv reports the location of bad cells") {
    TempFile file("t,ch1\n0,1\n0.1,oops\n0.2,3\n");
    try {
        ingest_csv(file.path.string(), CsvSchema::with_time_column("t"));
        FAIL("expected invalid_data");
    } catch (const Error& e) {
        CHECK(e.code() == errc::invalid_data);
        CHECK(std::string(e.what()).find("row 3") != std::string::npos);
        CHECK(std::string(e.what()).find("column 2") != std::string::npos);
    }
}

TEST_CASE("ingest_csv round-trips a generated record") {
    const BenchmarkData bench = make_benchmark("sdof-paper");
    TempFile file(snapshot_csv(bench.snapshots));
    const SnapshotMatrix back = ingest_csv(file.path.string(),
                                           CsvSchema::with_time_column("t"));
    CHECK(back.samples() == bench.snapshots.samples());
    CHECK(back.dt == Catch::Approx(bench.snapshots.dt).epsilon(1e-9));
    CHECK((back.data - bench.snapshots.data).cwiseAbs().maxCoeff() < 1e-15);
}
