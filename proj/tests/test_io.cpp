#include <gtest/gtest.h>

#include "mfhypo/io.hpp"
#include "mfhypo/pipeline.hpp"

using namespace mfhypo;
using io::json;

TEST(Config, DefaultsWhenEmpty) {
  const io::RunConfig rc = io::parse_run_config(json::object());
  EXPECT_EQ(rc.master_seed, 1u);
  EXPECT_EQ(rc.report_format, "json");
  EXPECT_EQ(rc.model.N, 2);
  EXPECT_FALSE(rc.simulate.observables.empty());
}

TEST(Config, CanonicalEchoRoundTrips) {
  const json j = {
      {"master_seed", 12345},
      {"model",
       {{"N", 8},
        {"d", 1},
        {"U", {{"family", "double_well"}, {"params", {{"quartic", 0.25}, {"well", 0.5}}}}},
        {"W", {{"family", "gaussian_bump"}, {"params", {{"amplitude", 0.05}, {"width", 1.0}, {"attractive", true}}}}}}},
      {"certify", {{"mode", "split"}, {"kappa", 0.3}}},
      {"simulate", {{"dt", 0.005}, {"replicas", 50}, {"observables", {"mean_position", "kinetic_energy"}}}},
      {"sweep", {{"Ns", {2, 4}}}},
      {"oracle", {{"fd_points", 7}}}};
  const io::RunConfig rc = io::parse_run_config(j);
  EXPECT_EQ(rc.model.N, 8);
  EXPECT_EQ(rc.certify.mode, ModeChoice::Split);
  EXPECT_EQ(*rc.certify.sources.kappa, 0.3);
  EXPECT_EQ(rc.simulate.integrator.dt, 0.005);
  EXPECT_EQ(rc.oracle.fd_points, 7);
  const json echo = io::to_json(rc);
  const io::RunConfig again = io::parse_run_config(echo);
  EXPECT_EQ(io::to_json(again), echo);
  EXPECT_EQ(io::config_hash(again), io::config_hash(rc));
}

TEST(Config, RejectsUnknownKeys) {
  EXPECT_THROW(io::parse_run_config({{"bogus", 1}}), InvalidInput);
  EXPECT_THROW(io::parse_run_config({{"simulate", {{"dtt", 0.1}}}}), InvalidInput);
  EXPECT_THROW(io::parse_run_config({{"model", {{"U", {{"family", "quadratic"}, {"params", {{"k", 1.0}}}}}}}}),
               InvalidInput);
}

TEST(Config, RejectsInvalidValues) {
  EXPECT_THROW(io::parse_run_config({{"simulate", {{"observables", json::array()}}}}), InvalidInput);
  EXPECT_THROW(io::parse_run_config({{"simulate", {{"observables", {"energy"}}}}}), InvalidInput);
  EXPECT_THROW(io::parse_run_config({{"simulate", {{"dt", 0.5}}}}), InvalidInput);
  EXPECT_THROW(io::parse_run_config({{"report_format", "xml"}}), InvalidInput);
  EXPECT_THROW(io::parse_run_config({{"master_seed", -1}}), InvalidInput);
  EXPECT_THROW(io::parse_run_config({{"sweep", {{"Ns", {8, 2}}}}}), InvalidInput);
  EXPECT_THROW(io::parse_run_config({{"certify", {{"kappa", -1.0}}}}), InvalidInput);
  EXPECT_THROW(io::parse_run_config({{"certify", {{"mode", "thm5"}}}}), InvalidInput);
  EXPECT_THROW(io::parse_run_config({{"model", {{"N", 1}}}}), InvalidInput);
}

TEST(Potentials, JsonRoundTrip) {
  for (const auto& s : {make_quadratic(2.0, 2), make_double_well(0.3, 0.1, 1), make_cosine(0.5, 2.0, 3)}) {
    const Role role = s.role;
    const PotentialSpec back = io::potential_from_json(io::to_json(s), role, "test");
    EXPECT_EQ(io::to_json(back), io::to_json(s));
  }
  const auto bump = make_gaussian_bump(0.2, 0.7, false, 2);
  EXPECT_EQ(io::to_json(io::potential_from_json(io::to_json(bump), Role::Interaction, "w")), io::to_json(bump));
  const auto zero = make_zero_interaction(1);
  EXPECT_TRUE(is_zero(io::potential_from_json(io::to_json(zero), Role::Interaction, "w")));
}

TEST(Hash, GitBlobIdentity) {
  EXPECT_EQ(io::git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(io::git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Hash, ChangesWithConfig) {
  io::RunConfig a;
  io::RunConfig b = a;
  b.master_seed = 2;
  EXPECT_NE(io::config_hash(a), io::config_hash(b));
}

TEST(Reports, CertificateValidates) {
  const PipelineResult pr =
      certify_model(make_quadratic(1.0), make_gaussian_bump(0.1, 1.0, true), {}, ModeChoice::Thm3, false);
  const json j = io::to_json(pr.certificate);
  EXPECT_NO_THROW(io::validate_certificate_json(j));
  const json reparsed = json::parse(j.dump());
  EXPECT_NO_THROW(io::validate_certificate_json(reparsed));
  json broken = j;
  broken.erase("lambda");
  EXPECT_THROW(io::validate_certificate_json(broken), InvalidInput);
}

TEST(Reports, DoubleFormattingRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, 2.1044e-3, 1e-300}) {
    EXPECT_EQ(std::stod(io::format_double(v)), v);
  }
}

TEST(Reports, SeriesCsvShape) {
  TimeSeries ts;
  ts.times = {0.0, 0.5};
  ts.replicas = 3;
  ts.observables.push_back({Observable::MeanPosition, {1.0, 0.5}, {0.1, 0.2}, {}});
  const std::string csv = io::series_csv(ts);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "time,observable_id,mean,variance,replicas");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Equilibrium, KnownValues) {
  const ModelConfig m{2, 3, make_quadratic(1.0, 3), make_zero_interaction(3)};
  EXPECT_EQ(io::known_equilibrium(Observable::MeanPosition, m), 0.0);
  EXPECT_EQ(io::known_equilibrium(Observable::KineticEnergy, m), 1.5);
}
