#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include "seisop/binio.hpp"
#include "seisop/dataset.hpp"

namespace fs = std::filesystem;
using namespace seisop;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("seisop_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string at(const std::string& name) { return (workdir() / name).string(); }

struct Run {
  int code;
  std::string out, err;
};

Run cli(const std::string& args) {
  const std::string o = at("stdout.txt"), e = at("stderr.txt");
  const std::string cmd = std::string(SEISOP_CLI) + " " + args + " > " + o + " 2> " + e;
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, binio::read_file(o), binio::read_file(e)};
}

std::string tiny_config() {
  const std::string path = at("tiny.json");
  if (!fs::exists(path)) {
    std::ofstream(path) << R"({
  "preset": "desk",
  "excitation": {"duration": 4},
  "network": {"width": 8, "layers": 2, "modes": 8, "projection_hidden": 16},
  "training": {"batch": 4, "epochs": 8, "learning_rate": 0.003},
  "splits": {"train": 8, "validation": 3, "test": 4},
  "refinement": {"sample_count": 200},
  "seed": 3
})";
  }
  return path;
}

std::string same_file(const std::string& a, const std::string& b) {
  return binio::read_file(a) == binio::read_file(b) ? "" : a + " differs from " + b;
}

}  // namespace

TEST(Cli, SynthIsReproducible) {
  ASSERT_EQ(cli("synth-gm --preset desk --count 1 --seed 7 -q --out " + at("g1.srd1")).code, 0);
  ASSERT_EQ(cli("synth-gm --preset desk --count 1 --seed 7 -q --out " + at("g2.srd1")).code, 0);
  EXPECT_EQ(same_file(at("g1.srd1"), at("g2.srd1")), "");
  ASSERT_EQ(cli("synth-gm --preset desk --count 1 --seed 8 -q --out " + at("g3.srd1")).code, 0);
  EXPECT_NE(binio::read_file(at("g1.srd1")), binio::read_file(at("g3.srd1")));
}

TEST(Cli, SynthFullScaleHeader) {
  ASSERT_EQ(cli("synth-gm --count 700 -q --out " + at("full.srd1")).code, 0);
  const auto d = load_dataset(at("full.srd1"));
  EXPECT_EQ(d.size(), 700u);
  EXPECT_EQ(d.grid.size(), 3001u);
  EXPECT_FALSE(d.has_z());
  EXPECT_FALSE(d.has_u());
}

TEST(Cli, SchemaErrorsExitNonzeroWithPath) {
  std::ofstream(at("bad.json")) << R"({"excitation": {"d_omega": -0.1}})";
  const auto r = cli("synth-gm --config " + at("bad.json") + " --count 1 --out " + at("never.srd1"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("config.excitation.d_omega"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(at("never.srd1")));
  EXPECT_NE(cli("train --mode sideways --out x").code, 0);
  EXPECT_NE(cli("frobnicate").code, 0);
}

TEST(Cli, RelaxedOneDatasetHasZEqualU) {
  ASSERT_EQ(cli("build-dataset --config " + tiny_config() + " --simplifier relaxed:1 --count 3 -q --out " +
                at("r1.srd1"))
                .code,
            0);
  const auto d = load_dataset(at("r1.srd1"));
  EXPECT_EQ(d.simplifier, simplify::SimplifierKind::relaxed(1));
  for (const Record& r : d.records) EXPECT_EQ(*r.z, *r.u);
}

TEST(Cli, ElsDatasetSuperposition) {
  ASSERT_EQ(cli("synth-gm --config " + tiny_config() + " --count 2 -q --out " + at("m.srd1")).code, 0);
  PairedDataset m = load_dataset(at("m.srd1"));
  Record sum = m.records[1];
  sum.index = 2;
  for (std::size_t k = 0; k < sum.a_g.steps(); ++k) sum.a_g(0, k) = m.records[0].a_g(0, k) + m.records[1].a_g(0, k);
  m.records.push_back(sum);
  save_dataset(at("m3.srd1"), m);
  ASSERT_EQ(cli("build-dataset --config " + tiny_config() + " --simplifier els --input " + at("m3.srd1") +
                " --csv 1 -q --out " + at("els.srd1"))
                .code,
            0);
  const auto d = load_dataset(at("els.srd1"));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < d.records[2].z->values().size(); ++i) {
    const double lin = d.records[0].z->values()[i] + d.records[1].z->values()[i];
    num += std::pow(d.records[2].z->values()[i] - lin, 2);
    den += lin * lin;
  }
  EXPECT_LT(std::sqrt(num / den), 1e-8);
  EXPECT_TRUE(fs::exists(at("els.srd1.record0.csv")));
}

TEST(Cli, TrainEvaluateStudyReproducible) {
  const std::string cfg = tiny_config();
  ASSERT_EQ(cli("build-dataset --config " + cfg + " -q --out " + at("data.srd1")).code, 0);
  ASSERT_EQ(cli("build-dataset --config " + cfg + " -q --out " + at("data_b.srd1")).code, 0);
  EXPECT_EQ(same_file(at("data.srd1"), at("data_b.srd1")), "");

  for (const char* tag : {"a", "b"}) {
    const auto r = cli("train --config " + cfg + " --mode composite -q --dataset " + at("data.srd1") + " --out " +
                       at(std::string("ck_") + tag + ".fno1"));
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(same_file(at("ck_a.fno1"), at("ck_b.fno1")), "");
  EXPECT_EQ(same_file(at("ck_a.fno1.history.csv"), at("ck_b.fno1.history.csv")), "");
  {
    std::istringstream hist(binio::read_file(at("ck_a.fno1.history.csv")));
    std::string line, first, last;
    std::getline(hist, line);
    std::getline(hist, first);
    while (std::getline(hist, line)) last = line;
    auto train_loss = [](const std::string& l) { return std::stod(l.substr(l.find(',') + 1)); };
    EXPECT_LT(train_loss(last), train_loss(first));
  }

  for (const char* tag : {"a", "b"}) {
    const auto r = cli("evaluate -q --checkpoint " + at("ck_a.fno1") + " --dataset " + at("data.srd1") +
                       " --refine --report " + at(std::string("rep_") + tag));
    ASSERT_EQ(r.code, 0) << r.err;
  }
  for (const char* ext : {".csv", ".json", ".peaks.csv"})
    EXPECT_EQ(same_file(at(std::string("rep_a") + ext), at(std::string("rep_b") + ext)), "");
  const std::string rep = binio::read_file(at("rep_a.csv"));
  EXPECT_EQ(rep.substr(0, rep.find('\n')), "model,story,rmse,relative_l2,sigma,runs");
  // Two models (plain and refined) by five stories.
  EXPECT_EQ(std::count(rep.begin(), rep.end(), '\n'), 11);
  EXPECT_NE(rep.find("cphysfno-els+refined,5,"), std::string::npos);

  const auto plain = cli("evaluate -q --checkpoint " + at("ck_a.fno1") + " --dataset " + at("data.srd1"));
  ASSERT_EQ(plain.code, 0);
  EXPECT_EQ(plain.out.substr(0, plain.out.find('\n')), "model,story,rmse,relative_l2,runs");

  const auto missing = cli("evaluate --checkpoint " + at("nope.fno1") + " --dataset " + at("data.srd1"));
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.err.find("nope.fno1"), std::string::npos);

  for (const char* tag : {"a", "b"}) {
    const auto r = cli("study --config " + cfg + " -q --vary train-size --values 4,8 --runs 2 --out " +
                       at(std::string("study_") + tag + ".csv"));
    ASSERT_EQ(r.code, 0) << r.err;
  }
  EXPECT_EQ(same_file(at("study_a.csv"), at("study_b.csv")), "");
  const std::string st = binio::read_file(at("study_a.csv"));
  EXPECT_EQ(std::count(st.begin(), st.end(), '\n'), 1 + 2 * 2 * 5);
  ASSERT_EQ(cli("study --config " + cfg + " -q --vary layers --values 1 --runs 1 --out " + at("layers.csv")).code, 0);
}

TEST(Cli, OutputRootForRelativePaths) {
  const std::string root = at("root");
  const std::string cmd = "SEISOP_OUTPUT_ROOT=" + root + " " + std::string(SEISOP_CLI) +
                          " synth-gm --preset desk --count 1 -q --out sub/g.srd1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(root + "/sub/g.srd1"));
}
