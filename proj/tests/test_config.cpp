#include <doctest.h>

#include <filesystem>
#include <string>

#include "dgc/config.hpp"
#include "dgc/error.hpp"

using namespace dgc;

namespace {

const char* kSample = R"(# demo
[dataset]
source = synthetic
components = 2
points_per_component = 20
dim = 2
means = 0, 0, 5, 5
variance = 0.5
seed = 4

[partition]
m = 4
scheme = heterogeneous
classes_min = 1
classes_max = 2
seed = 9

[topology]
kind = erdos_renyi
p = 0.3
seed = 2

[run]
loss = huber
delta = 2.5
rho = 10
B = 3
T = 40
K = 2
alpha = 0.001
init = warm_start_per_class
seed = 11
weights = unit
mode = parallel
threads = 2
kernels = scalar

[experiment]
repeats = 3
output_dir = /tmp/x
)";

ErrorKind kind_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::IoError;
}

std::string message_of(const std::string& text) {
    try {
        parse_config(text);
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_CASE("fields are read") {
    auto c = parse_config(kSample);
    CHECK(c.dataset.source == DatasetSource::synthetic);
    CHECK(c.dataset.means == std::vector<double>{0, 0, 5, 5});
    CHECK(c.m == 4);
    CHECK(c.partition == PartitionScheme::heterogeneous);
    CHECK(c.classes_max == 2);
    CHECK(c.topology == TopologyKind::erdos_renyi);
    CHECK(c.edge_probability == 0.3);
    CHECK(c.run.loss == LossKind::huber);
    CHECK(c.run.delta == 2.5);
    CHECK(c.run.B == 3);
    CHECK(c.run.alpha.rule == StepRule::explicit_value);
    CHECK(c.run.alpha.value == 0.001);
    CHECK(c.run.mode == ExecutionMode::parallel);
    CHECK(c.run.kernels == simd::Isa::scalar);
    CHECK(c.repeats == 3);
    CHECK(c.output_dir == "/tmp/x");
    CHECK_NOTHROW(c.validate());
}

TEST_CASE("serialization round-trips and is idempotent") {
    auto c = parse_config(kSample);
    auto s1 = serialize_config(c);
    auto c2 = parse_config(s1);
    CHECK(c2 == c);
    CHECK(serialize_config(c2) == s1);

    ExperimentConfig d;
    CHECK(parse_config(serialize_config(d)) == d);

    // Awkward doubles survive the text form exactly.
    c.run.rho = 1.0 + 0.1 + 0.2;
    c.outlier.huber_delta = 1e-300;
    CHECK(parse_config(serialize_config(c)) == c);
}

TEST_CASE("alpha spellings") {
    ExperimentConfig c;
    set_field(c, "run.alpha", "auto_theorem1");
    CHECK(c.run.alpha.rule == StepRule::theorem1);
    set_field(c, "run.alpha", "experimental");
    CHECK(c.run.alpha.rule == StepRule::experimental);
    set_field(c, "run.alpha", "2e-3");
    CHECK(c.run.alpha.rule == StepRule::explicit_value);
    CHECK(c.run.alpha.value == 2e-3);
}

TEST_CASE("bad input names the field or line") {
    CHECK(kind_of("[run]\nbogus = 1\n") == ErrorKind::InvalidSpec);
    CHECK(message_of("[run]\nbogus = 1\n").find("run.bogus") != std::string::npos);
    CHECK(kind_of("[nope]\nx = 1\n") == ErrorKind::InvalidSpec);
    CHECK(message_of("[run]\nrho = abc\n").find("run.rho") != std::string::npos);
    CHECK(kind_of("[run]\nK = -3\n") == ErrorKind::InvalidSpec);
    CHECK(kind_of("[run]\nloss = l1\n") == ErrorKind::InvalidSpec);
    CHECK(kind_of("rho = 1\n") == ErrorKind::InvalidSpec);
    auto msg = message_of("[run]\nrho = 1\n[broken\n");
    CHECK(msg.find('3') != std::string::npos);
}

TEST_CASE("overrides") {
    auto c = parse_config(kSample);
    apply_override(c, "run.rho=100");
    apply_override(c, "partition.m = 6");
    CHECK(c.run.rho == 100);
    CHECK(c.m == 6);
    CHECK_THROWS_AS(apply_override(c, "run.rho"), Error);
    CHECK_THROWS_AS(apply_override(c, "run.nothing=1"), Error);
}

TEST_CASE("validation") {
    std::string base = kSample;
    CHECK(kind_of(base + "[partition]\nm = 1\n[topology]\nkind = ring\n") == ErrorKind::InvalidSpec);
    auto c = parse_config(kSample);
    c.repeats = 0;
    CHECK_THROWS_AS(c.validate(), Error);
    c = parse_config(kSample);
    c.run.rho = 0.5;
    CHECK_THROWS_AS(c.validate(), Error);
    c = parse_config(kSample);
    c.dataset.means = {1, 2, 3};
    CHECK_THROWS_AS(c.validate(), Error);
    CHECK(kind_of("[dataset]\nsource = synthetic\n") == ErrorKind::InvalidSpec);
}

TEST_CASE("repeat seeds are offset") {
    auto c = parse_config(kSample);
    for (std::size_t r = 0; r < 3; ++r) {
        CHECK(c.run_config(r).seed == 11 + r);
        CHECK(c.partition_spec(r).seed == 9 + r);
    }
    auto rc = c.run_config(0);
    CHECK(rc.rho == 10);
    CHECK(rc.B == 3);
    CHECK(rc.loss.kind == LossKind::huber);
    CHECK(rc.weights == WeightConvention::unit);
}

TEST_CASE("shipped configs load and resolve paths against their directory") {
    namespace fs = std::filesystem;
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(fs::path(DGC_DATA_DIR) / "configs")) {
        if (e.path().extension() != ".ini") continue;
        CAPTURE(e.path().string());
        auto c = load_config(e.path());
        CHECK_NOTHROW(c.validate());
        if (c.dataset.source == DatasetSource::csv) CHECK(fs::exists(c.dataset.path));
        ++n;
    }
    CHECK(n >= 4);
}
