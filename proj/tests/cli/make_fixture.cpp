// Writes fixture bundles for the CLI tests: make_fixture <root> <scene_id>... [--stacked]
#include "bundles.hpp"

#include <iostream>

int main(int argc, char** argv) {
  if (argc < 3) {
    std::cerr << "usage: make_fixture <root> <scene_id>... [--stacked]\n";
    return 2;
  }
  fixtures::BundleOptions opt;
  opt.colors = true;
  std::vector<std::string> scenes;
  for (int i = 2; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--stacked") {
      opt.stacked_item = true;
    } else {
      scenes.push_back(a);
    }
  }
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    opt.seed = 1 + i;
    fixtures::write_bundle_fixture(std::filesystem::path(argv[1]) / scenes[i], scenes[i], opt);
  }
  return 0;
}
