#pragma once

// Command-line front end. `run` is the whole program; tools/pacisle.cpp only
// forwards argv to it so the tests can drive it in-process.

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "builder.hpp"
#include "runtime.hpp"
#include "shortener.hpp"
#include "word_io.hpp"

namespace pacisle {

namespace detail {

/// A word argument is a file path when such a file exists, else word text.
inline Word read_word_arg(const std::string& arg, const GroupPackage& pkg) {
  std::error_code ec;
  if (!arg.empty() && std::filesystem::is_regular_file(arg, ec)) return parse_word_document(read_text_file(arg), pkg);
  return parse_word(arg, pkg);
}

inline void print_short(std::ostream& out, const ShortWord& s, const Word& input, const Runtime& rt, bool with_trace) {
  const auto& pkg = rt.package();
  const bool ok = rt.action().is_identity(Expr(s.word) * Expr(invert(input)));
  out << "word: " << format_word(s.word, pkg) << '\n' << "length: " << length(s.word) << '\n';
  out << "pipeline: " << (s.trace ? "true" : "false") << '\n';
  if (with_trace && s.trace) out << format_trace(*s.trace, pkg);
  out << "verified: " << (ok ? "true" : "false") << '\n';
}

}  // namespace detail

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Word shortening in surrogate Pacific Island groups"};
  app.require_subcommand(1);

  std::string spec_path, pkg_dir, out_dir, w1, w2;
  std::uint64_t seed = 1;
  unsigned budget = ShortenOptions{}.restarts;
  unsigned samples = ShortenOptions{}.samples_per_step;
  unsigned trials = 100;
  bool with_trace = false, force = false, mc = false;

  auto* build = app.add_subcommand("build", "Build a package from a group spec");
  build->add_option("spec", spec_path)->required();
  build->add_option("outdir", out_dir)->required();

  auto* verify = app.add_subcommand("verify", "Re-check a package against its oracle");
  verify->add_option("pkg", pkg_dir)->required();

  auto* shorten = app.add_subcommand("shorten", "Shorten a word to at most 17 letters");
  shorten->add_option("pkg", pkg_dir)->required();
  shorten->add_option("word", w1)->required();
  shorten->add_option("--seed", seed);
  shorten->add_option("--budget", budget, "restarts");
  shorten->add_option("--samples", samples, "samples per step");
  shorten->add_flag("--trace", with_trace);
  shorten->add_flag("--force", force, "run the pipeline even on short input");

  auto* mul = app.add_subcommand("mul", "Multiply two words and shorten");
  mul->add_option("pkg", pkg_dir)->required();
  mul->add_option("w1", w1)->required();
  mul->add_option("w2", w2)->required();
  mul->add_option("--seed", seed);
  mul->add_option("--budget", budget, "restarts");

  auto* inv = app.add_subcommand("inv", "Invert a word");
  inv->add_option("pkg", pkg_dir)->required();
  inv->add_option("word", w1)->required();

  auto* order = app.add_subcommand("order", "Order of a word");
  order->add_option("pkg", pkg_dir)->required();
  order->add_option("word", w1)->required();

  auto* idtest = app.add_subcommand("idtest", "Identity test");
  idtest->add_option("pkg", pkg_dir)->required();
  idtest->add_option("word", w1)->required();
  idtest->add_flag("--mc", mc, "one random vector instead of the anchors");
  idtest->add_option("--seed", seed);

  auto* post = app.add_subcommand("post", "Changing post of an island involution in class K");
  post->add_option("pkg", pkg_dir)->required();
  post->add_option("word", w1)->required();
  auto* post_seed = post->add_option("--seed", seed, "use the randomized conjugacy search");

  auto* trace = app.add_subcommand("trace", "Trace of a word's matrix");
  trace->add_option("pkg", pkg_dir)->required();
  trace->add_option("word", w1)->required();

  auto* stats = app.add_subcommand("stats", "Failure rate and length distribution of shorten");
  stats->add_option("pkg", pkg_dir)->required();
  stats->add_option("--trials", trials);
  stats->add_option("--seed", seed);
  stats->add_option("--budget", budget, "restarts");

  auto* selftest = app.add_subcommand("selftest", "Quick consistency run on a package");
  selftest->add_option("pkg", pkg_dir)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return 0;
    }
    err << "error: " << errc::kUsage << ": " << e.what() << '\n';
    return 2;
  }

  try {
    if (*build) {
      BuildResult r = build_package(load_group_spec(spec_path));
      save_package(r.package, out_dir);
      save_oracle(r.oracle, out_dir);
      for (const auto& line : r.report) out << line << '\n';
      verify_package(load_package(out_dir), load_oracle(out_dir, r.package.field, r.package.dim));
      out << "verified: true\n";
      return 0;
    }
    if (*verify) {
      const GroupPackage pkg = load_package(pkg_dir);
      for (const auto& line : verify_package(pkg, load_oracle(pkg_dir, pkg.field, pkg.dim))) out << "ok: " << line << '\n';
      out << "verified: true\n";
      return 0;
    }

    const auto rt = load_runtime(pkg_dir);
    const GroupPackage& pkg = rt->package();
    const ActionEngine& act = rt->action();
    Rng rng(seed);
    ShortenOptions opt;
    opt.restarts = budget;
    opt.samples_per_step = samples;
    opt.force_pipeline = force;

    if (*shorten) {
      const Word w = detail::read_word_arg(w1, pkg);
      detail::print_short(out, rt->shortener().shorten(w, rng, opt), w, *rt, with_trace);
    } else if (*mul) {
      const Word u = detail::read_word_arg(w1, pkg), v = detail::read_word_arg(w2, pkg);
      const Shortener& sh = rt->shortener();
      const ShortWord su = sh.shorten(u, rng, opt), sv = sh.shorten(v, rng, opt);
      detail::print_short(out, sh.multiply_short(su, sv, rng, opt), concat(u, v), *rt, false);
    } else if (*inv) {
      const Word w = detail::read_word_arg(w1, pkg);
      const ShortWord r = rt->shortener().invert_short(ShortWord{w, std::nullopt});
      out << "word: " << format_word(r.word, pkg) << '\n' << "length: " << length(r.word) << '\n';
    } else if (*order) {
      out << act.order(detail::read_word_arg(w1, pkg)) << '\n';
    } else if (*idtest) {
      const Word w = detail::read_word_arg(w1, pkg);
      const bool id = mc ? act.is_identity_mc(w, rng) : act.is_identity(w);
      out << "identity: " << (id ? "true" : "false") << '\n';
    } else if (*post) {
      const Word w = detail::read_word_arg(w1, pkg);
      const Word u = rt->kit().changing_post(Expr(w), *post_seed ? &rng : nullptr);
      out << "post: " << format_word(u, pkg) << '\n' << "length: " << length(u) << '\n';
    } else if (*trace) {
      out << static_cast<unsigned>(act.trace_of_word(detail::read_word_arg(w1, pkg))) << '\n';
    } else if (*stats) {
      std::map<std::size_t, unsigned> lengths;
      unsigned failures = 0, pipeline = 0, wrong = 0;
      unsigned long restarts = 0;
      for (unsigned i = 0; i < trials; ++i) {
        const Word w = rt->kit().random_word(30 + uniform_below(rng, 31), rng);
        Rng run_rng(rng());
        try {
          const ShortWord s = rt->shortener().shorten(w, run_rng, opt);
          ++lengths[length(s.word)];
          if (s.trace) {
            ++pipeline;
            restarts += s.trace->restarts;
          }
          if (!act.is_identity(Expr(s.word) * Expr(invert(w)))) ++wrong;
        } catch (const Error& e) {
          if (e.code() != errc::kLasVegasFailure) throw;
          ++failures;
        }
      }
      out << "trials: " << trials << '\n'
          << "failures: " << failures << '\n'
          << "failure_rate: " << std::fixed << std::setprecision(4)
          << (trials ? static_cast<double>(failures) / trials : 0.0) << '\n'
          << "wrong_answers: " << wrong << '\n'
          << "pipeline_runs: " << pipeline << '\n'
          << "total_restarts: " << restarts << '\n';
      for (const auto& [len, count] : lengths) out << "length." << len << ": " << count << '\n';
    } else if (*selftest) {
      unsigned checks = 0;
      auto expect = [&](bool ok, const std::string& what) {
        if (!ok) throw Error(errc::kVerificationFailure, "selftest: " + what);
        ++checks;
      };
      expect(act.is_identity(Word()), "empty word is the identity");
      expect(act.order(Word::shuttle(1, pkg.id())) == 3, "T has order 3");
      expect(act.order(Word::of(IslandElem{pkg.z(), std::nullopt}, pkg.id())) == 2, "z has order 2");
      for (const auto& e : pkg.post) {
        const IslandElem x{pkg.matrix(e.rep_name), std::nullopt};
        expect(length(rt->kit().changing_post(x)) <= 4, "post for " + e.label);
      }
      for (unsigned i = 0; i < 20; ++i) {
        const Word w = rt->kit().random_word(40, rng);
        ShortenOptions forced = opt;
        forced.force_pipeline = true;
        const ShortWord s = rt->shortener().shorten(w, rng, forced);
        expect(length(s.word) <= kShortWordBound, "shortened length");
        expect(act.is_identity(Expr(s.word) * Expr(invert(w))), "shortened word equals input");
      }
      out << "checks: " << checks << '\n' << "selftest: ok\n";
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.code() << ": " << e.detail() << '\n';
    return 1;
  } catch (const CLI::Error& e) {
    err << "error: " << errc::kUsage << ": " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << errc::kIo << ": " << e.what() << '\n';
    return 1;
  }
}

}  // namespace pacisle
