#pragma once

#include <filesystem>
#include <memory>
#include <utility>

#include "action.hpp"
#include "island_kit.hpp"
#include "package.hpp"
#include "package_io.hpp"
#include "shortener.hpp"

namespace pacisle {

/// A loaded package with its engines. Members hold references into the
/// package, so a Runtime is pinned in place.
class Runtime {
 public:
  explicit Runtime(GroupPackage pkg) : pkg_(std::move(pkg)), act_(pkg_), kit_(pkg_, act_), shortener_(kit_) {}
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  const GroupPackage& package() const noexcept { return pkg_; }
  const ActionEngine& action() const noexcept { return act_; }
  const IslandKit& kit() const noexcept { return kit_; }
  const Shortener& shortener() const noexcept { return shortener_; }

 private:
  GroupPackage pkg_;
  ActionEngine act_;
  IslandKit kit_;
  Shortener shortener_;
};

inline std::unique_ptr<Runtime> load_runtime(const std::filesystem::path& dir) {
  return std::make_unique<Runtime>(load_package(dir));
}

}  // namespace pacisle
