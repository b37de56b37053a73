#include <gtest/gtest.h>

#include <string>

#include "mdlvq/config.hpp"

using namespace mdlvq;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text, "cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, MinimalUsesDefaults) {
  const ExperimentConfig cfg = parse_config_text("p = 0.05, 0.1\nrstar = 6\n");
  EXPECT_EQ(cfg.lattice, LatticeKind::Z2);
  EXPECT_EQ(cfg.K(), 2);
  EXPECT_EQ(cfg.dim(), 2);
  EXPECT_EQ(cfg.source.kind, SourceKind::Gaussian);
  EXPECT_DOUBLE_EQ(cfg.source.variance, 1.0);
  EXPECT_EQ(cfg.vectors, 200000U);
  EXPECT_EQ(cfg.seed, 1U);
  EXPECT_EQ(cfg.cap, 10000);
  EXPECT_FALSE(cfg.split);
  EXPECT_FALSE(cfg.psi);
  EXPECT_FALSE(cfg.indices);
  EXPECT_EQ(cfg.p, (std::vector<double>{0.05, 0.1}));
}

TEST(Config, AllKeysAndComments) {
  const ExperimentConfig cfg = parse_config_text(
      "# a comment\n"
      "lattice = A2   # trailing comment\n"
      "K = 3\n"
      "p = 0.025,0.05 , 0.075\n"
      "source = gaussian\n"
      "sigma2 = 2.5\n"
      "rstar = 8\n"
      "a = 0.5, 0.25, 0.25\n"
      "psi = 1.5\n"
      "N = 7, 7, 13\n"
      "nu = 0.01\n"
      "n = 1000\n"
      "seed = 99\n"
      "cap = 500\n"
      "out = run.csv\n"
      "assignment = table.txt\n"
      "\n");
  EXPECT_EQ(cfg.lattice, LatticeKind::A2);
  EXPECT_EQ(cfg.K(), 3);
  EXPECT_DOUBLE_EQ(cfg.source.variance, 2.5);
  EXPECT_DOUBLE_EQ(*cfg.rstar, 8.0);
  EXPECT_EQ(*cfg.split, (std::vector<double>{0.5, 0.25, 0.25}));
  EXPECT_DOUBLE_EQ(*cfg.psi, 1.5);
  EXPECT_EQ(*cfg.indices, (std::vector<std::int64_t>{7, 7, 13}));
  EXPECT_DOUBLE_EQ(*cfg.nu, 0.01);
  EXPECT_EQ(cfg.vectors, 1000U);
  EXPECT_EQ(cfg.seed, 99U);
  EXPECT_EQ(cfg.cap, 500);
  EXPECT_EQ(cfg.out, "run.csv");
  EXPECT_EQ(cfg.assignment, "table.txt");
}

TEST(Config, CustomSource) {
  const ExperimentConfig cfg = parse_config_text("lattice = Z1\np = 0.1, 0.1\nsource = custom\nh = 1.5\nmean_power = 2\nrstar = 4\n");
  EXPECT_EQ(cfg.source.kind, SourceKind::Custom);
  EXPECT_EQ(cfg.source.dim, 1);
  EXPECT_DOUBLE_EQ(cfg.source.entropy, 1.5);
  EXPECT_NE(error_of("p = 0.1, 0.1\nsource = custom\nh = 1.5\nrstar = 4\n").find("mean_power"), std::string::npos);
}

TEST(Config, ErrorsNameLineAndField) {
  EXPECT_EQ(error_of("p = 0.1, 0.1\nrstar = six\n"), "cfg:2: field 'rstar': expected a number, got 'six'");
  EXPECT_EQ(error_of("p = 0.1\nlattice = E8\n").rfind("cfg:2: field 'lattice':", 0), 0U);
  EXPECT_EQ(error_of("rstar = 6\nwhat = 1\n"), "cfg:2: field 'what': unknown key");
  EXPECT_EQ(error_of("p 0.1\n"), "cfg:1: expected 'key = value'");
  EXPECT_EQ(error_of("p = 0.1, 0.1\nn = -3\nrstar = 6\n").rfind("cfg:2: field 'n':", 0), 0U);
}

TEST(Config, SemanticChecks) {
  EXPECT_NE(error_of("rstar = 6\n").find("'p' is required"), std::string::npos);
  EXPECT_NE(error_of("p = 0.1, 1.5\nrstar = 6\n").find("field 'p'"), std::string::npos);
  EXPECT_NE(error_of("K = 3\np = 0.1, 0.1\nrstar = 6\n").find("field 'K'"), std::string::npos);
  EXPECT_NE(error_of("p = 0.1, 0.1\nrstar = 0\n").find("rstar"), std::string::npos);
  EXPECT_NE(error_of("p = 0.1, 0.1\n").find("rstar"), std::string::npos);
  EXPECT_NE(error_of("p = 0.1, 0.1\nrstar = 6\na = 1\n").find("field 'a'"), std::string::npos);
  EXPECT_NE(error_of("p = 0.1, 0.1\nrstar = 6\npsi = 0.5\n").find("psi"), std::string::npos);
  EXPECT_NE(error_of("p = 0.1, 0.1\nrstar = 6\nN = 5\n").find("field 'N'"), std::string::npos);
  EXPECT_NE(error_of("p = 0.1, 0.1\nrstar = 6\nN = 5, 0\n").find("field 'N'"), std::string::npos);
  EXPECT_NE(error_of("p = 0.1, 0.1\nrstar = 6\nnu = 0.1\n").find("'nu'"), std::string::npos);
  EXPECT_NE(error_of("p = 0.1, 0.1\nrstar = 6\nn = 0\n").find("'n'"), std::string::npos);
  EXPECT_NE(error_of("p = 0.1, 0.1\nrstar = 6\ncap = 0\n").find("'cap'"), std::string::npos);
  EXPECT_NE(error_of("p = 0.1, 0.1\nrstar = 6\nsigma2 = -1\n").find("sigma2"), std::string::npos);
  // N and nu together make rstar optional
  EXPECT_EQ(error_of("p = 0.1, 0.1\nN = 5, 5\nnu = 0.05\n"), "");
}

TEST(Config, MissingFile) { EXPECT_THROW(load_config("/nonexistent/mdlvq.cfg"), ConfigError); }

TEST(Config, HashIsStableAndSensitive) {
  const ExperimentConfig a = parse_config_text("p = 0.05, 0.1\nrstar = 6\n");
  const ExperimentConfig b = parse_config_text("# same thing, spelled differently\nrstar=6.0\np=0.05,0.10\nlattice=Z2\n");
  EXPECT_EQ(canonical_config(a), canonical_config(b));
  EXPECT_EQ(config_hash(a), config_hash(b));
  EXPECT_EQ(config_hash(a).size(), 16U);
  ExperimentConfig c = a;
  c.seed = 2;
  EXPECT_NE(config_hash(a), config_hash(c));
  ExperimentConfig d = a;
  d.p[1] = std::nextafter(0.1, 1.0);
  EXPECT_NE(config_hash(a), config_hash(d));
}

TEST(FormatExact, RoundTrips) {
  for (double v : {0.05, 1.0 / 3.0, 6.0, 1e-300, 0.053373338891709775}) {
    const std::string s = detail::format_exact(v);
    EXPECT_EQ(detail::parse_double(s), v) << s;
  }
  EXPECT_EQ(detail::format_exact(0.05), "0.05");
  EXPECT_EQ(detail::format_exact(6.0), "6");
}
