#include <iostream>

#include "CLI11.hpp"
#include "nlpb/errors.hpp"
#include "nlpb/parallel.hpp"
#include "nlpb/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Nonlocal p-biharmonic evolution experiments"};
  std::string config;
  std::string out = ".";
  int threads = 1;
  app.add_option("--config", config, "experiment file")->required();
  app.add_option("--out", out, "output directory (must exist)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 256));
  app.set_version_flag("--version", nlpb::kVersion);
  CLI11_PARSE(app, argc, argv);

  nlpb::set_num_threads(threads);
  try {
    const nlpb::ExperimentConfig cfg = nlpb::parse_config(config);
    return nlpb::run(cfg, out, std::cout, std::cerr);
  } catch (const nlpb::Error& e) {
    std::cerr << "ERROR " << e.code() << ' ' << e.what() << '\n';
    return 2;
  }
}
