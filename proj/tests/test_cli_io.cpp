// Copyright 2026 The oldroyd-spectral Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sys/wait.h>
#include <thread>

#include "oldroyd/config.hpp"
#include "oldroyd/io.hpp"
#include "test_support.hpp"

using namespace oldroyd;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("oldroyd-test-" + std::to_string(::getpid()) + "-" +
                                        ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

SimState sample_state(const Grid& g, unsigned seed) {
  SimState s(0.375, oldroyd::testing::random_divfree(g, seed, 4), oldroyd::testing::random_spectral(g, Rank::sym_tensor, seed + 1, 4));
  return s;
}

bool bit_equal(const SpectralField& a, const SpectralField& b) {
  if (a.components() != b.components()) return false;
  for (int c = 0; c < a.components(); ++c)
    for (std::size_t m = 0; m < a.grid().spectral_size(); ++m)
      if (a.component(c)[m] != b.component(c)[m]) return false;
  return true;
}

const char* minimal_config = "[grid]\ndim = 2\nn = 16\n[model]\nk = 0.5\n";

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(OLDROYD_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Checkpoint, RoundTripIsBitExact) {
  TempDir tmp;
  for (int dim : {2, 3}) {
    const Grid g{dim, 16};
    const SimState s = sample_state(g, 3);
    ModelParams p;
    p.k = 0.3;
    p.b = -0.25;
    p.alpha = 2.0;
    io::write_checkpoint(s, p, tmp.path / "a.ckpt");
    const auto ck = io::read_checkpoint(tmp.path / "a.ckpt", &g);
    EXPECT_EQ(ck.state.t, s.t);
    EXPECT_TRUE(bit_equal(ck.state.u, s.u));
    EXPECT_TRUE(bit_equal(ck.state.tau, s.tau));
    EXPECT_EQ(ck.params.k, p.k);
    EXPECT_EQ(ck.params.b, p.b);
    EXPECT_EQ(ck.params.alpha, p.alpha);
  }
}

TEST(Checkpoint, RejectsDamagedFiles) {
  TempDir tmp;
  const Grid g{2, 16};
  const fs::path good = tmp.path / "good.ckpt";
  io::write_checkpoint(sample_state(g, 1), ModelParams{}, good);
  const std::string bytes = io::read_text(good);

  auto expect_error = [&](const std::string& content, const std::string& fragment) {
    const fs::path bad = tmp.path / "bad.ckpt";
    std::ofstream(bad, std::ios::binary | std::ios::trunc) << content;
    try {
      io::read_checkpoint(bad);
      ADD_FAILURE() << "accepted a damaged checkpoint (" << fragment << ")";
    } catch (const io::IoError& e) {
      EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
    }
  };
  expect_error(bytes.substr(0, bytes.size() - 8), "truncated");
  std::string magic = bytes;
  magic[0] = 'X';
  expect_error(magic, "magic");
  std::string version = bytes;
  version[8] = 7;
  expect_error(version, "version");
  expect_error(bytes + "extra", "payload");

  const Grid other{2, 32};
  EXPECT_THROW(io::read_checkpoint(good, &other), io::IoError);
  EXPECT_THROW(io::read_checkpoint(tmp.path / "missing.ckpt"), io::IoError);
}

TEST(Series, HeaderOnlyAndReload) {
  TempDir tmp;
  io::emit_series({}, tmp.path / "empty.csv");
  EXPECT_EQ(io::read_text(tmp.path / "empty.csv"), io::series_header() + "\n");
  EXPECT_TRUE(io::read_series(tmp.path / "empty.csv").empty());

  std::vector<diag::TimeSeriesRecord> recs;
  for (int i = 0; i < 5; ++i) {
    diag::TimeSeriesRecord r{};
    auto a = diag::as_array(r);
    for (std::size_t c = 0; c < a.size(); ++c) a[c] = std::exp(0.37 * i) / (c + 3.0) - 1e-17 * c;
    recs.push_back(diag::from_array(a));
  }
  io::emit_series(recs, tmp.path / "s.csv");
  const auto back = io::read_series(tmp.path / "s.csv");
  ASSERT_EQ(back.size(), recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) EXPECT_EQ(diag::as_array(back[i]), diag::as_array(recs[i]));

  io::write_text(tmp.path / "bad.csv", "t,l2_u\n0,1\n");
  EXPECT_THROW(io::read_series(tmp.path / "bad.csv"), io::IoError);
}

TEST(RunDir, NeverReusesADirectory) {
  TempDir tmp;
  std::vector<fs::path> dirs(8);
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < dirs.size(); ++i)
    threads.emplace_back([&, i] {
      dirs[i] = io::create_run_dir(tmp.path, "run");
      io::write_checkpoint(sample_state(Grid{2, 8}, unsigned(i)), ModelParams{}, dirs[i] / "x.ckpt");
    });
  for (auto& t : threads) t.join();
  EXPECT_EQ(std::set<fs::path>(dirs.begin(), dirs.end()).size(), dirs.size());
  for (std::size_t i = 0; i < dirs.size(); ++i)
    EXPECT_TRUE(bit_equal(io::read_checkpoint(dirs[i] / "x.ckpt").state.u, sample_state(Grid{2, 8}, unsigned(i)).u));
  EXPECT_TRUE(fs::exists(tmp.path / "run"));
}

TEST(Config, MinimalFileTakesDefaults) {
  const auto cfg = config::parse_config(minimal_config);
  EXPECT_TRUE(cfg.scenario.empty());
  EXPECT_EQ(cfg.settings.grid.n, 16);
  EXPECT_EQ(cfg.settings.params.k, 0.5);
  EXPECT_EQ(cfg.settings.params.eta, ModelParams{}.eta);
  EXPECT_EQ(cfg.settings.stepper.scheme, StepperConfig{}.scheme);
}

TEST(Config, CouplingOutOfRangeNamesTheInterval) {
  try {
    config::parse_config("[grid]\ndim = 2\nn = 16\n[model]\nk = 11\n");
    FAIL() << "k = 11 accepted";
  } catch (const config::ConfigErrors& e) {
    ASSERT_EQ(e.errors().size(), 1u);
    EXPECT_EQ(e.errors()[0].line, 5);
    EXPECT_NE(e.errors()[0].message.find("[0, 10]"), std::string::npos);
  }
}

TEST(Config, ZeroStressDiffusionRejected) {
  try {
    config::parse_config("[grid]\ndim = 2\nn = 16\n[model]\neta = 0\n");
    FAIL() << "eta = 0 accepted";
  } catch (const config::ConfigErrors& e) {
    ASSERT_EQ(e.errors().size(), 1u);
    EXPECT_NE(e.errors()[0].message.find("eta = 0 is unsupported"), std::string::npos);
  }
}

TEST(Config, CollectsEveryErrorWithLines) {
  const std::string text =
      "[grid]\n"         // 1
      "dim = 4\n"        // 2
      "n = 16\n"         // 3
      "[model]\n"        // 4
      "kk = 1\n"         // 5
      "b = 2\n"          // 6
      "[stepper]\n"      // 7
      "scheme = euler\n" // 8
      "[bogus]\n"        // 9
      "x = 1\n";         // 10
  try {
    config::parse_config(text);
    FAIL() << "bad configuration accepted";
  } catch (const config::ConfigErrors& e) {
    std::vector<int> lines;
    for (const auto& err : e.errors()) lines.push_back(err.line);
    EXPECT_EQ(lines, (std::vector<int>{2, 5, 6, 8, 9}));
    EXPECT_NE(std::string(e.what()).find("unknown key 'kk'"), std::string::npos);
  }
  try {
    config::parse_config("[model]\nk = 1\nk = 2\n");
    FAIL();
  } catch (const config::ConfigErrors& e) {
    ASSERT_EQ(e.errors().size(), 2u);
    EXPECT_EQ(e.errors()[0].line, 3);  // repeated key
    EXPECT_EQ(e.errors()[1].line, 0);  // missing [grid]
  }
}

TEST(Config, EchoRoundTrips) {
  for (const std::string& name : {std::string(), std::string("k_continuity"), std::string("k_sweep")}) {
    std::string text = minimal_config;
    if (!name.empty()) text = "[run]\nscenario = " + name + "\n" + text + "b = 0.25\n[stepper]\ndt_max = 0.3\n";
    const auto cfg = config::parse_config(text);
    const std::string once = config::echo(cfg);
    const auto again = config::parse_config(once);
    EXPECT_EQ(config::echo(again), once);
    EXPECT_EQ(again.scenario, name);
    EXPECT_EQ(again.settings.params.k, 0.5);
  }
}

TEST(Config, ShippedConfigsParse) {
  for (const auto& e : fs::directory_iterator(OLDROYD_CONFIG_DIR))
    if (e.path().extension() == ".ini") {
      EXPECT_NO_THROW(config::load_config(e.path())) << e.path();
    }
}

TEST(Resume, CheckpointContinuationIsBitIdentical) {
  TempDir tmp;
  const Grid g{2, 16};
  ModelParams p;
  p.k = 0.5;
  SimState s0 = sample_state(g, 8);
  s0.t = 0.0;
  s0.u *= 0.2 / l2_norm(s0.u);
  s0.tau *= 0.2 / l2_norm(s0.tau);
  StepperConfig c;
  c.fixed_dt = true;
  c.dt_init = 0.02;
  c.t_end = 1.0;
  c.snapshot_every = 0.5;
  const SimState straight = run_until(s0, p, c, {});

  c.t_end = 0.5;
  io::write_checkpoint(run_until(s0, p, c, {}), p, tmp.path / "mid.ckpt");
  const auto ck = io::read_checkpoint(tmp.path / "mid.ckpt");
  c.t_end = 1.0;
  const SimState resumed = run_until(ck.state, ck.params, c, {});
  EXPECT_TRUE(bit_equal(resumed.u, straight.u));
  EXPECT_TRUE(bit_equal(resumed.tau, straight.tau));
  EXPECT_NEAR(resumed.t, straight.t, 1e-14);
}

TEST(Cli, ExitCodesAndRunLayout) {
  TempDir tmp;
  const fs::path log = tmp.path / "log.txt";
  io::write_text(tmp.path / "ok.ini", std::string(minimal_config) +
                                          "[stepper]\nt_end = 0.2\nsnapshot_every = 0.1\nfixed_dt = true\n"
                                          "dt_init = 0.01\n[data]\namplitude = 0.1\nkmax = 3\n");
  ASSERT_EQ(run_cli("run --config " + (tmp.path / "ok.ini").string() + " --output " + (tmp.path / "out").string(), log), 0)
      << io::read_text(log);
  const fs::path dir = tmp.path / "out" / "run";
  for (const char* f : {"config.ini", "series.csv", "final.ckpt", "latest.ckpt", "run.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(io::read_series(dir / "series.csv").size(), 3u);
  EXPECT_NO_THROW(config::load_config(dir / "config.ini"));

  // resuming a finished run from its own checkpoint continues from t_end
  ASSERT_EQ(run_cli("run --config " + (tmp.path / "ok.ini").string() + " --output " + (tmp.path / "out").string() +
                        " --resume " + (dir / "final.ckpt").string(),
                    log),
            0);

  EXPECT_EQ(run_cli("spectrum " + (dir / "final.ckpt").string(), log), 0);
  EXPECT_NE(io::read_text(log).find("block,energy"), std::string::npos);

  io::write_text(tmp.path / "bad.ini", "[grid]\ndim = 2\nn = 16\n[model]\nk = 11\n");
  EXPECT_EQ(run_cli("run --config " + (tmp.path / "bad.ini").string(), log), 2);
  EXPECT_NE(io::read_text(log).find("[0, 10]"), std::string::npos);
  EXPECT_EQ(run_cli("spectrum " + (dir / "final.ckpt").string() + " --field p", log), 2);
  EXPECT_EQ(run_cli("frobnicate", log), 2);

  experiments::Report pass{"k_sweep", {{"a", true, ""}}}, fail{"k_sweep", {{"a", true, ""}, {"b", false, "x"}}};
  fs::create_directories(tmp.path / "r1");
  fs::create_directories(tmp.path / "r2");
  io::write_text(tmp.path / "r1" / "report.json", pass.to_json().dump());
  EXPECT_EQ(run_cli("report " + (tmp.path / "r1").string(), log), 0);
  io::write_text(tmp.path / "r2" / "report.json", fail.to_json().dump());
  EXPECT_EQ(run_cli("report " + tmp.path.string(), log), 1);
}
