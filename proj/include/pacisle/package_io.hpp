#pragma once

// Package directory layout:
//   manifest.txt    key = value lines
//   matrices.txt    `matrix <name> <d>` blocks
//   posttable.txt   `rep <label> <matrix-name>` / `tail <label> <word tokens>`
//   membership.txt  `<fingerprint> <gen-word tokens>`
//   kernel.txt      optional: basis, exponent, probe index sets, quotient map
// oracle.txt may sit in the same directory; nothing here reads it.

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "package.hpp"
#include "word_io.hpp"

namespace pacisle {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(errc::kIo, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error(errc::kIo, "cannot write " + p.string());
  out << text;
}

/// key = value lines; '#' starts a comment line.
inline std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(errc::kParseError, "expected 'key = value': " + line);
    kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return kv;
}

inline const std::string& require_key(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw Error(errc::kParseError, "missing key '" + key + "'");
  return it->second;
}

inline std::uint64_t to_u64(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(errc::kParseError, "bad integer for " + what + ": '" + s + "'");
  }
}

inline std::map<std::string, Mat> parse_matrix_blocks(const std::string& text, FieldSpec f) {
  std::map<std::string, Mat> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::istringstream h(line);
    std::string kw, name;
    std::size_t d = 0;
    if (!(h >> kw >> name >> d) || kw != "matrix") throw Error(errc::kParseError, "expected matrix header: " + line);
    out[name] = read_matrix_rows(in, d, f);
  }
  return out;
}

inline std::string gen_word_from_stream(std::istream& in, GenWord& w) {
  std::string tok;
  while (in >> tok) {
    auto g = tok.size() == 1 ? gen_from_char(tok[0]) : std::nullopt;
    if (!g) return tok;
    w.push_back(*g);
  }
  return {};
}

inline std::vector<std::size_t> parse_indices(std::istringstream& in, std::size_t dim) {
  std::vector<std::size_t> out;
  std::size_t i;
  while (in >> i) {
    if (i == 0 || i > dim) throw Error(errc::kParseError, "probe index out of range");
    out.push_back(i - 1);
  }
  return out;
}

}  // namespace detail

/// Single-token rendering of a quotient probe extraction.
inline std::string extraction_key(const Mat& m) {
  std::string s = format_residues(m.entries(), m.field());
  if (!compact_digits(m.field()))
    for (auto& c : s)
      if (c == ' ') c = ',';
  return s;
}

inline GroupPackage load_package(const std::filesystem::path& dir) {
  using namespace detail;
  GroupPackage pkg;
  const auto kv = parse_key_values(read_text_file(dir / "manifest.txt"));
  pkg.name = require_key(kv, "name");
  pkg.field = FieldSpec(static_cast<unsigned>(to_u64(require_key(kv, "field"), "field")));
  pkg.dim = to_u64(require_key(kv, "dim"), "dim");
  if (pkg.dim == 0 || pkg.dim > kMaxDimension)
    throw Error(errc::kDimensionMismatch, "package dimension " + std::to_string(pkg.dim) + " outside [1, 256]");
  pkg.max_order = static_cast<unsigned>(to_u64(require_key(kv, "max_order"), "max_order"));
  pkg.class_k = require_key(kv, "class_k");
  pkg.meta.group_order = to_u64(require_key(kv, "group_order"), "group_order");
  pkg.meta.island_order = to_u64(require_key(kv, "island_order"), "island_order");
  pkg.meta.k_class_size = to_u64(require_key(kv, "k_class_size"), "k_class_size");
  pkg.meta.letter_bytes = to_u64(require_key(kv, "letter_bytes"), "letter_bytes");
  pkg.meta.z_zT_order = static_cast<unsigned>(to_u64(require_key(kv, "z_zT_order"), "z_zT_order"));
  pkg.anchors.v1 = parse_vec(require_key(kv, "anchor1"), pkg.field);
  pkg.anchors.v2 = parse_vec(require_key(kv, "anchor2"), pkg.field);
  if (pkg.anchors.v1.size() != pkg.dim || pkg.anchors.v2.size() != pkg.dim)
    throw Error(errc::kDimensionMismatch, "anchor length does not match dimension");

  std::map<std::uint64_t, std::string> probes;
  for (const auto& [k, v] : kv) {
    if (k.rfind("probe.", 0) == 0) probes[to_u64(k.substr(6), "probe index")] = v;
    if (k.rfind("signature.", 0) == 0) pkg.classes.signatures[k.substr(10)] = parse_signature(v);
  }
  for (auto& [_, w] : probes) pkg.classes.probe_words.push_back(w);

  pkg.matrices = parse_matrix_blocks(read_text_file(dir / "matrices.txt"), pkg.field);
  for (const char* req : {"a", "b", "z", "T"}) {
    if (pkg.matrix(req).dim() != pkg.dim)
      throw Error(errc::kDimensionMismatch, std::string("matrix ") + req + " has wrong dimension");
  }

  {
    std::istringstream in(read_text_file(dir / "membership.txt"));
    std::string line;
    while (std::getline(in, line)) {
      if (trim(line).empty()) continue;
      std::istringstream ls(line);
      Fingerprint fp = parse_fingerprint(ls, pkg.dim, pkg.field);
      GenWord w;
      if (auto bad = gen_word_from_stream(ls, w); !bad.empty())
        throw Error(errc::kParseError, "bad generator token '" + bad + "'");
      pkg.membership.add(std::move(fp), std::move(w));
    }
  }

  {
    std::istringstream in(read_text_file(dir / "posttable.txt"));
    std::string line;
    std::map<std::string, std::size_t> by_label;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::string kw, label;
      ls >> kw >> label;
      if (kw == "rep") {
        std::string mname;
        ls >> mname;
        pkg.matrix(mname);
        by_label[label] = pkg.post.size();
        pkg.post.push_back(PostEntry{label, mname, Word()});
      } else if (kw == "tail") {
        auto it = by_label.find(label);
        if (it == by_label.end()) throw Error(errc::kParseError, "tail before rep for " + label);
        std::string rest;
        std::getline(ls, rest);
        pkg.post[it->second].tail = parse_word(rest, pkg);
      } else {
        throw Error(errc::kParseError, "bad posttable line: " + line);
      }
    }
  }

  if (std::filesystem::exists(dir / "kernel.txt")) {
    KernelData kd;
    std::istringstream in(read_text_file(dir / "kernel.txt"));
    std::string line;
    while (std::getline(in, line)) {
      line = trim(line);
      if (line.empty() || line[0] == '#') continue;
      std::istringstream ls(line);
      std::string kw;
      ls >> kw;
      if (kw == "basis") {
        std::string n;
        while (ls >> n) {
          pkg.matrix(n);
          kd.basis_names.push_back(n);
        }
      } else if (kw == "exponent") {
        ls >> kd.exponent;
      } else if (kw == "in") {
        kd.probe_in = parse_indices(ls, pkg.dim);
      } else if (kw == "out") {
        kd.probe_out = parse_indices(ls, pkg.dim);
      } else if (kw == "quot") {
        std::string key;
        ls >> key;
        GenWord w;
        if (auto bad = gen_word_from_stream(ls, w); !bad.empty())
          throw Error(errc::kParseError, "bad generator token '" + bad + "'");
        kd.quotient_map[key] = std::move(w);
      } else {
        throw Error(errc::kParseError, "bad kernel line: " + line);
      }
    }
    if (kd.probe_in.size() != kd.probe_out.size() || kd.probe_in.empty())
      throw Error(errc::kParseError, "kernel probe sets must be non-empty and of equal size");
    pkg.kernel = std::move(kd);
  }
  return pkg;
}

inline void save_package(const GroupPackage& pkg, const std::filesystem::path& dir) {
  using namespace detail;
  std::filesystem::create_directories(dir);
  {
    std::ostringstream m;
    m << "name = " << pkg.name << '\n'
      << "field = " << pkg.field.p() << '\n'
      << "dim = " << pkg.dim << '\n'
      << "group_order = " << pkg.meta.group_order << '\n'
      << "island_order = " << pkg.meta.island_order << '\n'
      << "k_class_size = " << pkg.meta.k_class_size << '\n'
      << "max_order = " << pkg.max_order << '\n'
      << "class_k = " << pkg.class_k << '\n'
      << "letter_bytes = " << pkg.meta.letter_bytes << '\n'
      << "z_zT_order = " << pkg.meta.z_zT_order << '\n'
      << "anchor1 = " << format_vec(pkg.anchors.v1) << '\n'
      << "anchor2 = " << format_vec(pkg.anchors.v2) << '\n';
    for (std::size_t i = 0; i < pkg.classes.probe_words.size(); ++i)
      m << "probe." << (i + 1) << " = " << pkg.classes.probe_words[i] << '\n';
    for (const auto& [label, sig] : pkg.classes.signatures)
      m << "signature." << label << " = " << format_signature(sig) << '\n';
    write_text_file(dir / "manifest.txt", m.str());
  }
  {
    std::ostringstream m;
    for (const auto& [name, mat] : pkg.matrices) write_matrix(m, name, mat);
    write_text_file(dir / "matrices.txt", m.str());
  }
  {
    std::ostringstream m;
    for (const auto& e : pkg.post) {
      m << "rep " << e.label << ' ' << e.rep_name << '\n';
      const std::string tail = format_word(e.tail, pkg);
      m << "tail " << e.label << (tail.empty() ? "" : " ") << tail << '\n';
    }
    write_text_file(dir / "posttable.txt", m.str());
  }
  {
    std::ostringstream m;
    for (const auto& [fp, w] : pkg.membership.entries) {
      m << render_fingerprint(fp, pkg.field);
      if (!w.empty()) m << ' ' << gen_word_tokens(w);
      m << '\n';
    }
    write_text_file(dir / "membership.txt", m.str());
  }
  if (pkg.kernel) {
    const KernelData& kd = *pkg.kernel;
    std::ostringstream m;
    m << "basis";
    for (const auto& n : kd.basis_names) m << ' ' << n;
    m << "\nexponent " << kd.exponent << "\nin";
    for (auto i : kd.probe_in) m << ' ' << (i + 1);
    m << "\nout";
    for (auto i : kd.probe_out) m << ' ' << (i + 1);
    m << '\n';
    for (const auto& [key, w] : kd.quotient_map) {
      m << "quot " << key;
      if (!w.empty()) m << ' ' << gen_word_tokens(w);
      m << '\n';
    }
    write_text_file(dir / "kernel.txt", m.str());
  } else {
    std::filesystem::remove(dir / "kernel.txt");
  }
}

}  // namespace pacisle
