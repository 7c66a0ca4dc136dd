#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qtlab/runner.hpp"
#include "qtlab/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qtlab: quantum tunneling traversal-time laboratory"};
  app.set_version_flag("--version", std::string("qtlab ") + qtlab::kVersion);

  std::string command;
  std::string config_path;
  std::string output_path;
  int threads = 0;
  bool verbose = false;

  app.add_option("command", command,
                 "transmission | times | larmor | kk | wavepacket | acceptance");
  app.add_option("-c,--config", config_path, "key = value config file");
  app.add_option("-o,--output", output_path, "output CSV path (overrides config)");
  app.add_option("-t,--threads", threads, "worker threads for sweeps (overrides config)");
  app.add_flag("-v,--verbose", verbose, "echo the effective command before running");

  CLI11_PARSE(app, argc, argv);

  try {
    qtlab::ConfigMap cfg;
    if (!config_path.empty()) {
      cfg = qtlab::ConfigMap::from_file(config_path);
    } else if (command.empty()) {
      throw qtlab::ConfigError("nothing to do: pass a command or --config");
    }
    if (!command.empty()) cfg.override_value("command", command);
    if (!output_path.empty()) cfg.override_value("output", output_path);
    if (threads > 0) cfg.override_value("threads", std::to_string(threads));
    if (verbose) {
      cfg.override_value("verbose", "true");
      std::cerr << "qtlab " << qtlab::kVersion << ": running '"
                << cfg.get_string("command", "?") << "'\n";
    }
    return qtlab::run_command(cfg);
  } catch (const qtlab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const qtlab::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 4;
  } catch (const qtlab::ComputeError& e) {
    std::cerr << "compute error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
