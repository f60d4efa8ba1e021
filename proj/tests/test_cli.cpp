#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "nlpb/config.hpp"
#include "nlpb/errors.hpp"
#include "nlpb/pgm.hpp"
#include "nlpb/run.hpp"

using namespace nlpb;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / ("nlpb_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary);
  out << s;
}

int config_error_line(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

std::string config_error_key(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.key();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config gets defaults") {
  const ExperimentConfig c = parse_config_text("command = evolve\np = 2\n");
  CHECK(c.command == Command::Evolve);
  CHECK(c.kernel == "tent");
  CHECK(c.epsilon == 0.2);
  CHECK(c.dim == 1);
  CHECK(c.nx == 64);
  CHECK(c.ny == 64);
  CHECK(c.h == 0.005);
  CHECK(c.T == 1.0);
  CHECK(c.seed == 1);
  CHECK(c.mode == StepMode::Implicit);
  CHECK(c.solver == InnerSolver::Newton);
  CHECK(c.initial == "random");
  CHECK(c.stepper().step_count() == 200);
}

TEST_CASE("config syntax") {
  const ExperimentConfig c = parse_config_text(
      "# comment\n\ncommand = converge   # trailing\nepsilon_list = 0.4, 0.2,0.1\np = 3\nsolver = bb\n");
  CHECK(c.epsilon_list == std::vector<double>{0.4, 0.2, 0.1});
  CHECK(c.p == 3.0);
  CHECK(c.solver == InnerSolver::BarzilaiBorwein);
  CHECK(parse_config_text("command = consistency\n").epsilon_list == std::vector<double>{0.2, 0.1, 0.05});

  CHECK(config_error_line("command = evolve\np = 1.0\n") == 2);
  CHECK(config_error_key("command = evolve\np = 1.0\n") == "p");
  CHECK(config_error_line("command = evolve\nepsilon_list = 0.1,0.2\n") == 2);
  CHECK(config_error_key("command = evolve\nbogus = 1\n") == "bogus");
  CHECK(config_error_line("command = evolve\n\nnx = 32\nnx = 64\n") == 4);
  CHECK(config_error_line("command = evolve\nnx = 3.5\n") == 2);
  CHECK(config_error_line("command = evolve\nh =\n") == 2);
  CHECK(config_error_line("command = evolve\njust text\n") == 2);
  CHECK(config_error_key("p = 2\n") == "command");
  CHECK(config_error_key("command = decay\np = 1.5\n") == "p");
  CHECK(config_error_key("command = consistency\ndim = 2\n") == "dim");
  CHECK(config_error_key("command = denoise\n") == "input");
  CHECK(config_error_key("command = evolve\nmode = explicit\np = 3\n") == "mode");
  CHECK(config_error_key("command = evolve\nh = 0.5\nT = 0.1\n") == "h");
  CHECK(config_error_key("command = evolve\nlo = 1\nhi = 0\n") == "hi");
}

TEST_CASE("missing config file") {
  CHECK_THROWS_AS(parse_config("/nonexistent/dir/x.cfg"), IoError);
}

TEST_CASE("config hash") {
  CHECK(config_hash("") == "cbf29ce484222325");
  CHECK(config_hash("a") == "af63dc4c8601ec8c");
  CHECK(config_hash("command = evolve\n") != config_hash("command = evolve \n"));
}

TEST_CASE("pgm 4x4 all-128 P5") {
  const fs::path d = scratch("pgm");
  std::string data = "P5\n# test\n4 4\n255\n";
  data += std::string(16, static_cast<char>(128));
  spit(d / "a.pgm", data);
  const Field f = read_pgm(d / "a.pgm");
  CHECK(f.spec().dim == 2);
  CHECK(f.spec().interior_count() == 16);
  CHECK(f.spec().dx == 1.0);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(f[i] == (f.spec().is_interior(i) ? 128.0 / 255.0 : 0.0));

  write_pgm(f, d / "b.pgm");
  CHECK(slurp(d / "b.pgm") == "P5\n4 4\n255\n" + std::string(16, static_cast<char>(128)));
}

TEST_CASE("pgm round trip and formats") {
  const fs::path d = scratch("pgm2");
  std::mt19937 rng(4);
  std::string pixels;
  for (int i = 0; i < 7 * 5; ++i) pixels += static_cast<char>(rng() % 256);
  spit(d / "in.pgm", "P5 7 5 255\n" + pixels);
  write_pgm(read_pgm(d / "in.pgm"), d / "out.pgm");
  CHECK(slurp(d / "out.pgm") == "P5\n7 5\n255\n" + pixels);

  spit(d / "p2.pgm", "P2\n# ascii\n3 2\n# max\n10\n0 5 10\n10 5 0\n");
  const PgmImage a = read_pgm_image(d / "p2.pgm");
  CHECK(a.width == 3);
  CHECK(a.height == 2);
  CHECK(a.pixels == std::vector<double>{0, 0.5, 1, 1, 0.5, 0});

  std::string wide = "P5\n2 1\n65535\n";
  wide += std::string{static_cast<char>(0xff), static_cast<char>(0xff), 0x00, static_cast<char>(0x80)};
  spit(d / "w.pgm", wide);
  const PgmImage w = read_pgm_image(d / "w.pgm");
  CHECK(w.pixels[0] == 1.0);
  CHECK(w.pixels[1] == 128.0 / 65535.0);

  PgmImage clip{2, 1, 255, {-0.5, 1.5}};
  write_pgm_image(clip, d / "clip.pgm");
  const PgmImage back = read_pgm_image(d / "clip.pgm");
  CHECK(back.pixels == std::vector<double>{0.0, 1.0});
}

TEST_CASE("malformed pgm") {
  const fs::path d = scratch("pgm3");
  spit(d / "a.pgm", "P6\n2 2\n255\n");
  CHECK_THROWS_AS(read_pgm_image(d / "a.pgm"), IoError);
  spit(d / "b.pgm", "P5\n4 4\n255\n" + std::string(10, 'x'));
  CHECK_THROWS_AS(read_pgm_image(d / "b.pgm"), IoError);
  spit(d / "c.pgm", "P2\n2 1\n10\n3 11\n");
  CHECK_THROWS_AS(read_pgm_image(d / "c.pgm"), IoError);
  spit(d / "d.pgm", "P5\n2 2\n70000\n");
  CHECK_THROWS_AS(read_pgm_image(d / "d.pgm"), IoError);
  spit(d / "e.pgm", "P5\n0 2\n255\n");
  CHECK_THROWS_AS(read_pgm_image(d / "e.pgm"), IoError);
  CHECK_THROWS_AS(read_pgm_image(d / "missing.pgm"), IoError);
}

TEST_CASE("run: evolve from zero") {
  const fs::path d = scratch("evolve_zero");
  const auto cfg = parse_config_text("command = evolve\ninitial = zero\nnx = 32\nT = 0.05\np = 1.5\n");
  std::ostringstream out;
  std::ostringstream err;
  CHECK(run(cfg, d, out, err) == 0);
  CHECK(err.str().empty());
  const std::string traj = slurp(d / "trajectory.csv");
  std::istringstream in(traj);
  std::string line;
  std::getline(in, line);
  CHECK(line == "step,time,l2_sq,energy,increment_sq,inner_iters,residual");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream cells(line);
    std::string cell;
    std::vector<std::string> v;
    while (std::getline(cells, cell, ',')) v.push_back(cell);
    CHECK(v[2] == "0");
    CHECK(v[3] == "0");
  }
  CHECK(rows == 11);
  CHECK(slurp(d / "manifest.csv") == "command,config_hash,version\nevolve," + config_hash(cfg.source) + ",0.1.0\n");
  for (const auto& e : fs::directory_iterator(d))
    if (e.path().extension() == ".csv") CHECK(slurp(e.path()).find(',') < slurp(e.path()).find('\n'));
}

TEST_CASE("run: missing output directory") {
  const auto cfg = parse_config_text("command = evolve\n");
  std::ostringstream out;
  std::ostringstream err;
  CHECK(run(cfg, "/nonexistent/nlpb/out", out, err) == 2);
  CHECK(err.str().rfind("ERROR IO ", 0) == 0);
}

TEST_CASE("run: consistency") {
  const fs::path d = scratch("consistency");
  std::ostringstream out;
  std::ostringstream err;
  CHECK(run(parse_config_text("command = consistency\nnx = 512\n"), d, out, err) == 0);
  CHECK(out.str().find("PASS") != std::string::npos);
  CHECK(out.str().find("FAIL") == std::string::npos);
  CHECK(slurp(d / "consistency.csv").rfind("epsilon,error,error_over_dx2\n", 0) == 0);
  CHECK(slurp(d / "consistency_summary.csv").find("fitted_order,") != std::string::npos);
}

TEST_CASE("run: denoise a noisy gradient") {
  const fs::path d = scratch("denoise");
  const int w = 32;
  const int h = 24;
  std::mt19937 rng(9);
  std::normal_distribution<double> noise(0.0, 20.0);
  std::string px;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double v = 40.0 + 170.0 * x / (w - 1) + noise(rng);
      px += static_cast<char>(static_cast<unsigned char>(std::clamp(std::lround(v), 0L, 255L)));
    }
  spit(d / "noisy.pgm", "P5\n32 24\n255\n" + px);
  const auto cfg = parse_config_text("command = denoise\ninput = " + (d / "noisy.pgm").string() +
                                     "\np = 2\nepsilon = 4\nh = 0.5\nT = 5\n");
  std::ostringstream out;
  std::ostringstream err;
  CHECK(run(cfg, d, out, err) == 0);
  INFO(out.str() << err.str());
  CHECK(out.str().find("FAIL") == std::string::npos);
  const PgmImage res = read_pgm_image(d / "denoised.pgm");
  CHECK(res.width == w);
  CHECK(res.height == h);
  CHECK(slurp(d / "denoise.csv").rfind("quantity,input,output\n", 0) == 0);
}
