#include <iostream>

#include <CLI11.hpp>

#include "surfdyn/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = surfdyn::cli;
  CLI::App app{"surface diffeomorphism experiments"};
  app.set_version_flag("--version", std::string(cli::kVersion));

  std::string command, config, out = "out";
  std::optional<std::uint64_t> seed;
  std::string choices;
  for (const auto& s : cli::subcommands()) choices += (choices.empty() ? "" : ", ") + s;
  app.add_option("command", command, "one of: " + choices)
      ->required()
      ->check(CLI::IsMember(cli::subcommands()));
  app.add_option("--config", config, "JSON config file (defaults apply when omitted)");
  app.add_option("--out", out, "output directory")->capture_default_str();
  app.add_option("--seed", seed, "overrides the config seed");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto o = config.empty()
                       ? cli::run(command, cli::json::object(), out, seed)
                       : cli::run_file(command, config, out, seed);
    const auto& err = o.report.at("error");
    if (!err.is_null())
      std::cerr << command << ": " << err.at("code").get<std::string>() << ": "
                << err.at("message").get<std::string>() << '\n';
    else
      std::cout << command << ": " << o.report.at("status").get<std::string>() << '\n';
    return o.exit_code;
  } catch (const std::exception& e) {
    // only reached when the output directory itself is unusable
    std::cerr << command << ": " << e.what() << '\n';
    return 1;
  }
}
