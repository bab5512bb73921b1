// relief_server: hosts engine sessions over HTTP + WebSocket.

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "relief/asset_io.hpp"
#include "relief/fixtures.hpp"
#include "relief/server.hpp"

using namespace relief;
using namespace relief::service;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

// Enough levels to bring the coarsest one near the default window size.
std::size_t auto_levels(const DepthField& f) {
  std::size_t levels = 1;
  std::size_t n = std::max(f.width(), f.height());
  while (n > kDefaultRoiNodes && std::min(f.width(), f.height()) >> levels >= 5) {
    n = reduced_size(n);
    ++levels;
  }
  return levels;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Session server for depth-grid haptic exploration"};
  std::vector<std::string> asset_specs;
  std::string address = "127.0.0.1";
  std::uint16_t port = 8080;
  std::size_t levels = 0;
  std::string static_dir;
  bool no_demo = false;

  app.add_option("--asset", asset_specs, "id=path to a depth grid; repeatable");
  app.add_option("--levels", levels, "pyramid levels per asset (0 = automatic)");
  app.add_option("--address", address);
  app.add_option("--port", port, "0 picks a free port");
  app.add_option("--static-dir", static_dir, "directory served under GET /");
  app.add_flag("--no-demo", no_demo, "skip the built-in flat-plane asset");
  CLI11_PARSE(app, argc, argv);

  try {
    SessionManager manager;
    auto add = [&](const std::string& id, DepthField field) {
      if (!field.is_filled()) field = fill_holes(field);
      const std::size_t n = levels > 0 ? levels : auto_levels(field);
      manager.add_asset(id, std::make_shared<const DepthPyramid>(build_pyramid(field, n)));
      std::cout << "asset " << id << ": " << field.width() << "x" << field.height() << ", " << n
                << " levels\n";
    };
    if (!no_demo) add("demo", fixtures::make_field(fixtures::FieldKind::kFlat, 401));
    for (const auto& spec : asset_specs) {
      const auto eq = spec.find('=');
      if (eq == std::string::npos || eq == 0) {
        std::cerr << "ERROR code=invalid_input message=--asset expects id=path\n";
        return 2;
      }
      add(spec.substr(0, eq), load_depth_grid(spec.substr(eq + 1)));
    }

    ServerOptions options;
    options.address = address;
    options.port = port;
    if (!static_dir.empty()) options.static_dir = static_dir;
    Server server(manager, options);
    server.start();
    std::cout << "listening on http://" << address << ":" << server.port() << std::endl;

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
    server.stop();
    manager.close_all();
  } catch (const std::exception& e) {
    std::cerr << "ERROR message=" << e.what() << '\n';
    return 2;
  }
  return 0;
}
