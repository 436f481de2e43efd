#include "support.hpp"

#include "passdil/cli.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

using namespace passdil;
using passdil::io::Json;
using passdil::support::data_path;

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  Json report;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  Outcome o;
  o.code = cli::run(std::move(args), out, err);
  o.out = out.str();
  o.err = err.str();
  if (!o.out.empty() && o.out.front() == '{') o.report = Json::parse(o.out);
  return o;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("passdil_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

void expect_verdicts_have_residuals(const Json& report) {
  ASSERT_TRUE(report.contains("verdicts"));
  for (const auto& [key, value] : report.at("verdicts").items()) {
    EXPECT_TRUE(value.is_boolean()) << key;
    ASSERT_TRUE(report.at("residuals").contains(key)) << key;
    EXPECT_TRUE(report.at("residuals").at(key).is_number()) << key;
  }
  EXPECT_TRUE(report.contains("command"));
  EXPECT_TRUE(report.contains("input_digest"));
  EXPECT_EQ(report.at("tolerance").at("rel").get<double>(), 1e-9);
}

}  // namespace

TEST(Json, MatrixRoundTripIsBitExact) {
  RealMatrix m(2, 3);
  m << 0.1, -0.0, 1.0 / 3.0,  //
      5e-324, -1.7976931348623157e308, std::sqrt(0.5);
  const std::string text = io::dump(io::matrix_to_json(m));
  const RealMatrix back = io::matrix_from_json(io::parse_text(text), 2, 3, "m");
  for (Eigen::Index i = 0; i < 2; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) {
      EXPECT_EQ(back(i, j), m(i, j));
      EXPECT_EQ(std::signbit(back(i, j)), std::signbit(m(i, j)));
    }
  EXPECT_EQ(io::dump(io::matrix_to_json(back)), text);
}

TEST(Json, MatrixShapeAndValueErrors) {
  EXPECT_THROW(io::matrix_from_json(Json::parse("[[1, 2]]"), 2, 2, "m"), InvalidInput);
  EXPECT_THROW(io::matrix_from_json(Json::parse("[[1, 2], [3]]"), 2, 2, "m"), InvalidInput);
  EXPECT_THROW(io::matrix_from_json(Json::parse("[[1, \"a\"], [3, 4]]"), 2, 2, "m"), InvalidInput);
  EXPECT_THROW(io::parse_text("{\"n\": "), InvalidInput);
}

TEST(Json, Sha256KnownVector) {
  EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(io::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST(ChannelFile, GoldenFilesParse) {
  const auto e1 = io::channel_from_json(io::parse_text(io::read_file(data_path("noisy_identity.json"))));
  EXPECT_EQ(e1.channel.x, RealMatrix::Identity(2, 2));
  EXPECT_EQ(e1.metadata.at("description"), "identity map plus unit classical noise");
  const auto e2 = io::channel_from_json(io::parse_text(io::read_file(data_path("half_loss.json"))));
  EXPECT_EQ(e2.channel.y, 0.5 * RealMatrix::Identity(2, 2));
}

TEST(ChannelFile, InterleavedIsConvertedToBlocked) {
  const auto f = io::channel_from_json(
      io::parse_text(io::read_file(data_path("partial_loss_interleaved.json"))));
  EXPECT_EQ(f.ordering, ModeOrdering::interleaved);
  RealVector x(4);
  x << std::sqrt(0.5), 1.0, std::sqrt(0.5), 1.0;
  EXPECT_LE(max_abs(f.channel.x - RealMatrix(x.asDiagonal())), 1e-15);
  RealVector y(4);
  y << 0.5, 0.0, 0.5, 0.0;
  EXPECT_EQ(f.channel.y, RealMatrix(y.asDiagonal()));
}

TEST(ChannelFile, RejectsMalformed) {
  for (const char* name : {"truncated.json", "asymmetric_y.json", "wrong_shape.json"})
    EXPECT_THROW(io::channel_from_json(io::parse_text(io::read_file(data_path(name)))), InvalidInput)
        << name;
  EXPECT_THROW(io::channel_from_json(Json::parse(R"({"n": 1, "X": [[1, 0], [0, 1]]})")), InvalidInput);
  EXPECT_THROW(io::channel_from_json(Json::parse(R"({"n": 0, "X": [], "Y": []})")), InvalidInput);
  EXPECT_THROW(io::channel_from_json(Json::parse(
                   R"({"n": 1, "ordering": "xxpp", "X": [[1, 0], [0, 1]], "Y": [[0, 0], [0, 0]]})")),
               InvalidInput);
  EXPECT_THROW(io::channel_from_json(Json::parse(
                   R"({"format": "passdil/dilation", "n": 1, "X": [[1, 0], [0, 1]], "Y": [[0, 0], [0, 0]]})")),
               InvalidInput);
  EXPECT_THROW(io::read_file("/nonexistent/passdil.json"), InvalidInput);
}

TEST(ChannelFile, WriteReadWriteIsByteIdentical) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto inst = random_dilatable_channel(2, 2, seed % 2 == 0, seed);
    for (auto ordering : {ModeOrdering::blocked, ModeOrdering::interleaved}) {
      const std::string first = io::dump(io::channel_to_json(inst.channel, ordering));
      const auto parsed = io::channel_from_json(io::parse_text(first));
      EXPECT_EQ(parsed.channel.x, inst.channel.x);
      EXPECT_EQ(parsed.channel.y, inst.channel.y);
      EXPECT_EQ(io::dump(io::channel_to_json(parsed.channel, ordering)), first);

      const std::string dil = io::dump(io::dilation_to_json(inst.dilation, ordering));
      const auto back = io::dilation_from_json(io::parse_text(dil));
      EXPECT_EQ(back.s, inst.dilation.s);
      EXPECT_EQ(back.gamma_e, inst.dilation.gamma_e);
      EXPECT_EQ(io::dump(io::dilation_to_json(back, ordering)), dil);
    }
  }
}

TEST(NormalFormFile, RoundTrip) {
  const auto c = random_dilatable_channel(2, 1, false, 17).channel;
  const auto nf = compute_normal_form(c);
  for (auto ordering : {ModeOrdering::blocked, ModeOrdering::interleaved}) {
    const std::string text = io::dump(io::normal_form_to_json(nf, ordering));
    const auto back = io::normal_form_from_json(io::parse_text(text));
    EXPECT_EQ(back.g.matrix(), nf.g.matrix());
    EXPECT_EQ(back.f.matrix(), nf.f.matrix());
    EXPECT_EQ(back.lambda, nf.lambda);
    EXPECT_EQ(back.gamma_e, nf.gamma_e);
    EXPECT_EQ(io::dump(io::normal_form_to_json(back, ordering)), text);
  }
}

TEST_F(CliTest, CheckNoisyIdentityIsNegative) {
  const auto o = run_cli({"check", data_path("noisy_identity.json")});
  EXPECT_EQ(o.code, 1);
  EXPECT_FALSE(o.report.at("verdicts").at("kernel_ok").get<bool>());
  EXPECT_FALSE(o.report.at("verdicts").at("dilatable").get<bool>());
  EXPECT_NE(o.err.find("ker(Y)"), std::string::npos);
  expect_verdicts_have_residuals(o.report);
  EXPECT_EQ(o.report.at("input_digest").at("channel"),
            io::sha256_hex(io::read_file(data_path("noisy_identity.json"))));
}

TEST_F(CliTest, CheckHalfLoss) {
  const auto one = run_cli({"check", data_path("half_loss.json"), "--modes", "1"});
  EXPECT_EQ(one.code, 0);
  EXPECT_TRUE(one.report.at("verdicts").at("dilatable").get<bool>());
  EXPECT_EQ(one.report.at("values").at("minimal_modes"), 1);
  EXPECT_TRUE(one.report.at("verdicts").at("passive").get<bool>());
  expect_verdicts_have_residuals(one.report);

  const auto zero = run_cli({"check", data_path("half_loss.json"), "--modes", "0"});
  EXPECT_EQ(zero.code, 1);
  EXPECT_FALSE(zero.report.at("verdicts").at("modes_ok").get<bool>());

  const auto def = run_cli({"check", data_path("half_loss.json")});
  EXPECT_EQ(def.code, 0);
  EXPECT_EQ(def.report.at("values").at("modes"), 1);
}

TEST_F(CliTest, CheckInputErrors) {
  for (const char* name : {"truncated.json", "asymmetric_y.json", "wrong_shape.json"}) {
    const auto o = run_cli({"check", data_path(name)});
    EXPECT_EQ(o.code, 2) << name;
    EXPECT_TRUE(o.out.empty()) << name;
    EXPECT_FALSE(o.err.empty()) << name;
  }
  EXPECT_EQ(run_cli({"check", path("missing.json")}).code, 2);
  EXPECT_EQ(run_cli({"check"}).code, 2);
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"check", data_path("half_loss.json"), "--modes", "-1"}).code, 2);
  EXPECT_EQ(run_cli({"check", data_path("half_loss.json"), "--tol", "-1"}).code, 2);
  EXPECT_EQ(run_cli({"dilate", data_path("half_loss.json"), "--ordering", "xxpp"}).code, 2);
}

TEST_F(CliTest, DilateWritesVerifiedFile) {
  const auto o = run_cli({"dilate", data_path("half_loss.json"), "--out", path("d.json")});
  ASSERT_EQ(o.code, 0) << o.err;
  expect_verdicts_have_residuals(o.report);
  const Json doc = io::parse_text(io::read_file(path("d.json")));
  EXPECT_EQ(doc.at("ordering"), "blocked");
  EXPECT_TRUE(doc.at("verification").at("ok").get<bool>());
  const auto d = io::dilation_from_json(doc);
  EXPECT_LE(max_abs(d.s2() - std::sqrt(0.5) * RealMatrix::Identity(2, 2)), 1e-12);
  EXPECT_LE(max_abs(d.gamma_e - RealMatrix::Identity(2, 2)), 1e-12);

  const auto v = run_cli({"verify", data_path("half_loss.json"), path("d.json")});
  EXPECT_EQ(v.code, 0);
  expect_verdicts_have_residuals(v.report);
}

TEST_F(CliTest, DilateIdentityWithoutEnvironment) {
  const auto o = run_cli({"dilate", data_path("identity.json"), "--modes", "0", "--out", path("id.json")});
  ASSERT_EQ(o.code, 0) << o.err;
  const auto d = io::dilation_from_json(io::parse_text(io::read_file(path("id.json"))));
  EXPECT_EQ(d.s, RealMatrix::Identity(4, 4));
  EXPECT_EQ(d.gamma_e.size(), 0);
  EXPECT_EQ(run_cli({"verify", data_path("identity.json"), path("id.json")}).code, 0);
}

TEST_F(CliTest, DilateNoisyIdentityIsNegative) {
  const auto o = run_cli({"dilate", data_path("noisy_identity.json"), "--out", path("nope.json")});
  EXPECT_EQ(o.code, 1);
  EXPECT_EQ(o.report.at("failure"), "ker(Y) differs from ker(I - X X^T)");
  EXPECT_FALSE(fs::exists(path("nope.json")));
}

TEST_F(CliTest, DilateInterleavedOutputVerifies) {
  const auto o = run_cli({"dilate", data_path("partial_loss_interleaved.json"), "--ordering",
                          "interleaved", "--out", path("d.json")});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_EQ(io::parse_text(io::read_file(path("d.json"))).at("ordering"), "interleaved");
  EXPECT_EQ(run_cli({"verify", data_path("partial_loss_interleaved.json"), path("d.json")}).code, 0);
}

TEST_F(CliTest, VerifyDetectsTampering) {
  ASSERT_EQ(run_cli({"dilate", data_path("half_loss.json"), "--out", path("d.json")}).code, 0);
  Json doc = io::parse_text(io::read_file(path("d.json")));
  doc["gamma_E"][0][0] = doc["gamma_E"][0][0].get<double>() + 1e-2;
  io::write_file(path("t.json"), io::dump(doc));
  const auto o = run_cli({"verify", data_path("half_loss.json"), path("t.json")});
  EXPECT_EQ(o.code, 1);
  EXPECT_NEAR(o.report.at("residuals").at("eq_noise").get<double>(), 0.5e-2, 1e-12);
  EXPECT_EQ(o.report.at("failure"), "s2 gamma_E s2^T != Y");
}

TEST_F(CliTest, VerifyDimensionMismatch) {
  ASSERT_EQ(run_cli({"dilate", data_path("half_loss.json"), "--out", path("d.json")}).code, 0);
  const auto o = run_cli({"verify", data_path("identity.json"), path("d.json")});
  EXPECT_EQ(o.code, 2);
  EXPECT_FALSE(o.err.empty());
}

TEST_F(CliTest, NormalForm) {
  const auto o = run_cli({"normal-form", data_path("half_loss.json"), "--out", path("nf.json")});
  ASSERT_EQ(o.code, 0) << o.err;
  expect_verdicts_have_residuals(o.report);
  const Json doc = io::parse_text(io::read_file(path("nf.json")));
  EXPECT_NEAR(doc.at("lambda").at(0).get<double>(), 0.5, 1e-12);
  EXPECT_LE(doc.at("reconstruction_residual").get<double>(), 1e-8);

  const auto id = run_cli({"normal-form", data_path("identity.json")});
  ASSERT_EQ(id.code, 0);
  for (const auto& l : id.report.at("artifacts").at("normal_form").at("lambda")) EXPECT_EQ(l.get<double>(), 1.0);

  EXPECT_EQ(run_cli({"normal-form", data_path("noisy_identity.json")}).code, 1);
}

TEST_F(CliTest, RandomIsSeedDeterministicAndVerifies) {
  ASSERT_EQ(run_cli({"random", "--n", "2", "--l", "3", "--seed", "42", "--out", path("a")}).code, 0);
  ASSERT_EQ(run_cli({"random", "--n", "2", "--l", "3", "--seed", "42", "--out", path("b")}).code, 0);
  ASSERT_EQ(run_cli({"random", "--n", "2", "--l", "3", "--seed", "43", "--out", path("c")}).code, 0);
  EXPECT_EQ(io::read_file(path("a-channel.json")), io::read_file(path("b-channel.json")));
  EXPECT_EQ(io::read_file(path("a-dilation.json")), io::read_file(path("b-dilation.json")));
  EXPECT_NE(io::read_file(path("a-channel.json")), io::read_file(path("c-channel.json")));
  EXPECT_EQ(run_cli({"verify", path("a-channel.json"), path("a-dilation.json")}).code, 0);
}

TEST_F(CliTest, RandomRequiresSeed) {
  EXPECT_EQ(run_cli({"random", "--n", "1", "--l", "1"}).code, 2);
  EXPECT_EQ(run_cli({"random", "--n", "0", "--l", "1", "--seed", "1"}).code, 2);
}

TEST_F(CliTest, RandomPassiveEnvironmentCommutes) {
  for (int seed = 0; seed < 10; ++seed) {
    const std::string prefix = path("p" + std::to_string(seed));
    ASSERT_EQ(run_cli({"random", "--n", "2", "--l", "2", "--passive-env", "--seed", std::to_string(seed),
                       "--out", prefix})
                  .code,
              0);
    const auto c = run_cli({"check", prefix + "-channel.json"});
    EXPECT_EQ(c.code, 0);
    EXPECT_TRUE(c.report.at("verdicts").at("y_commutes_sigma").get<bool>());

    const std::string sq = path("s" + std::to_string(seed));
    ASSERT_EQ(run_cli({"random", "--n", "2", "--l", "2", "--seed", std::to_string(seed), "--out", sq}).code, 0);
    EXPECT_FALSE(run_cli({"check", sq + "-channel.json"}).report.at("verdicts").at("y_commutes_sigma").get<bool>());
  }
}

TEST_F(CliTest, CheckAtMinimalModesAcceptsRandomOutputs) {
  for (int seed = 0; seed < 20; ++seed) {
    const std::string prefix = path("r" + std::to_string(seed));
    const std::string n = std::to_string(1 + seed % 3);
    const std::string l = std::to_string(1 + (seed / 3) % 3);
    ASSERT_EQ(run_cli({"random", "--n", n, "--l", l, "--seed", std::to_string(seed), "--out", prefix}).code, 0);
    const auto probe = run_cli({"check", prefix + "-channel.json"});
    const auto k = probe.report.at("values").at("minimal_modes").get<int>();
    EXPECT_EQ(run_cli({"check", prefix + "-channel.json", "--modes", std::to_string(k)}).code, 0);
  }
}

TEST_F(CliTest, ToleranceOverride) {
  const auto o = run_cli({"check", data_path("half_loss.json"), "--tol", "1e-6"});
  EXPECT_EQ(o.code, 0);
  EXPECT_EQ(o.report.at("tolerance").at("rel").get<double>(), 1e-6);
}

TEST_F(CliTest, HelpExitsCleanly) {
  const auto o = run_cli({"--help"});
  EXPECT_EQ(o.code, 0);
  EXPECT_NE(o.out.find("normal-form"), std::string::npos);
}
