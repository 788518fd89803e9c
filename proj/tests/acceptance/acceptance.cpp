// Acceptance runner: one line per criterion, exit 0 when everything passes,
// 1 on any failure, 77 when nothing failed but something could not run.

#include "acceptance/criteria.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>

namespace {

const char* label(acceptance::Status s) {
  switch (s) {
    case acceptance::Status::pass:
      return "PASS";
    case acceptance::Status::fail:
      return "FAIL";
    case acceptance::Status::blocked:
      return "BLOCKED";
  }
  return "?";
}

int usage() {
  std::fprintf(stderr, "usage: acceptance [--group core|datasets|all] [--only ID]\n");
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  std::string group = "all";
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--group") == 0 && i + 1 < argc) {
      group = argv[++i];
    } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      return usage();
    }
  }
  if (group != "core" && group != "datasets" && group != "all") return usage();

  std::vector<acceptance::Criterion> list;
  if (group != "datasets") {
    for (auto& c : acceptance::core_criteria()) list.push_back(std::move(c));
  }
  if (group != "core") {
    for (auto& c : acceptance::dataset_criteria()) list.push_back(std::move(c));
  }

  int failed = 0;
  int blocked = 0;
  for (const auto& c : list) {
    if (only != 0 && c.id != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    acceptance::Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {acceptance::Status::fail, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += out.status == acceptance::Status::fail;
    blocked += out.status == acceptance::Status::blocked;
    std::printf("[%s] %2d %s: %s (%.1f s)\n", label(out.status), c.id, c.title.c_str(),
                out.detail.c_str(), secs);
    std::fflush(stdout);
  }
  if (failed > 0) return 1;
  return blocked > 0 ? 77 : 0;
}
