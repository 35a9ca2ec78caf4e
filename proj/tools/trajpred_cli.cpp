// trajpred: simulate | fit-map | train | predict | optimize | evaluate | plot | run

#include "trajpred/error.hpp"
#include "trajpred/pipeline.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

namespace {

std::vector<std::string> split_cases(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic trajectory prediction with chance-constrained refinement"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> cases;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"simulate", "Generate the simulated dataset and occupancy grid"},
      {"fit-map", "Fit the continuous occupancy field to the dataset grid"},
      {"train", "Train the mixture network and the naive baseline"},
      {"predict", "Write prior mixtures for the test pairs"},
      {"optimize", "Constrain every prior against the occupancy field"},
      {"evaluate", "Write the ADE/FDE/AL/CVP report"},
      {"plot", "Render SVG overlays for selected test cases"},
      {"run", "simulate, fit-map, train, predict, optimize and evaluate"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key = value run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "base random seed (overrides the config)");
    if (name == "plot") sub->add_option("--cases", cases, "comma-separated test case ids");
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    trajpred::RunConfig config = config_path.empty() ? trajpred::RunConfig{} : trajpred::load_run_config(config_path);
    if (!out_dir.empty()) config.out = out_dir;
    if (seed) config.seed = *seed;

    if (command == "simulate") {
      trajpred::cmd_simulate(config);
    } else if (command == "fit-map") {
      trajpred::cmd_fit_map(config);
    } else if (command == "train") {
      trajpred::cmd_train(config);
    } else if (command == "predict") {
      trajpred::cmd_predict(config);
    } else if (command == "optimize") {
      trajpred::cmd_optimize(config);
    } else if (command == "evaluate") {
      std::cout << trajpred::cmd_evaluate(config).text;
    } else if (command == "plot") {
      std::optional<std::vector<std::string>> selection;
      if (cases) selection = split_cases(*cases);
      for (const auto& file : trajpred::cmd_plot(config, selection)) std::cout << file.string() << "\n";
    } else {
      std::cout << trajpred::run_pipeline(config).text;
    }
  } catch (const trajpred::Error& e) {
    std::cerr << "error: " << trajpred::category_name(e.category()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: io: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
