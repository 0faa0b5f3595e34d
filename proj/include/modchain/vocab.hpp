#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace modchain {

// Pool of parameter names. The built-in pool is pinned: reordering or editing
// it would silently change every generated dataset, so it carries a version
// string that generation manifests echo.
class Vocabulary {
 public:
  Vocabulary(std::vector<std::string> names, std::string version);

  const std::vector<std::string>& names() const { return names_; }
  const std::string& version() const { return version_; }
  std::size_t size() const { return names_.size(); }
  const std::string& at(std::size_t i) const { return names_[i]; }

 private:
  std::vector<std::string> names_;
  std::string version_;
};

// The pinned 200-noun pool.
const Vocabulary& builtin_vocabulary();

// Loads one name per line (blank lines skipped); rejects duplicates and
// embedded whitespace. The version is derived from the file content hash.
Vocabulary load_vocabulary(const std::filesystem::path& path);

}  // namespace modchain
