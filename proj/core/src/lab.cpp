#include "schonmann/lab.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "schonmann/cluster.hpp"
#include "schonmann/csv.hpp"
#include "schonmann/mixing.hpp"
#include "schonmann/parallel.hpp"
#include "schonmann/snapshot.hpp"

namespace schonmann {

namespace {

// --- config parsing ---------------------------------------------------------

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& v, const std::string& key, int line) {
  try {
    size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw config_error(line, "bad numeric value for '" + key + "'");
  }
}

int64_t parse_int(const std::string& v, const std::string& key, int line) {
  try {
    size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("");
    return d;
  } catch (...) {
    throw config_error(line, "bad integer value for '" + key + "'");
  }
}

uint64_t parse_u64(const std::string& v, const std::string& key, int line) {
  const int64_t d = parse_int(v, key, line);
  if (d < 0) throw config_error(line, "'" + key + "' must be >= 0");
  return static_cast<uint64_t>(d);
}

std::vector<std::string> split(const std::string& v, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : v) {
    if (c == sep) {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::vector<int> parse_int_list(const std::string& v, const std::string& key,
                                int line) {
  std::vector<int> out;
  for (const std::string& tok : split(v, ','))
    out.push_back(static_cast<int>(parse_int(tok, key, line)));
  return out;
}

std::vector<double> parse_double_list(const std::string& v,
                                      const std::string& key, int line) {
  std::vector<double> out;
  for (const std::string& tok : split(v, ','))
    out.push_back(parse_double(tok, key, line));
  return out;
}

const std::vector<std::string> kExperiments = {
    "oracle-check", "sample",      "g-estimate",      "vark",
    "theta",        "prop-domi",   "phi-mixing",      "cone-mixing",
    "two-sided-probe", "duality",  "decimate"};

bool consumes_randomness(const std::string& experiment) {
  return experiment != "duality";
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  bool experiment_line_seen = false;

  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string stripped = trim(raw);
    if (stripped.empty()) continue;

    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw config_error(line, "expected 'key = value'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty()) throw config_error(line, "empty key");
    if (value.empty()) throw config_error(line, "empty value for '" + key + "'");

    if (key == "experiment") {
      if (std::find(kExperiments.begin(), kExperiments.end(), value) ==
          kExperiments.end())
        throw config_error(line, "unknown experiment '" + value + "'");
      cfg.experiment = value;
      experiment_line_seen = true;
    } else if (key == "beta") {
      cfg.beta = parse_double(value, key, line);
      if (cfg.beta < 0.0)
        throw config_error(line, "'beta' must be >= 0");
    } else if (key == "betas") {
      cfg.betas = parse_double_list(value, key, line);
      for (double b : cfg.betas)
        if (b <= 0.0) throw config_error(line, "'betas' entries must be > 0");
    } else if (key == "h") {
      cfg.h = parse_double(value, key, line);
    } else if (key == "field_sign") {
      if (value == "paper_literal")
        cfg.field_sign = FieldSign::paper_literal;
      else if (value == "conventional")
        cfg.field_sign = FieldSign::conventional;
      else
        throw config_error(line, "'field_sign' must be paper_literal or conventional");
    } else if (key == "boxes") {
      cfg.boxes = parse_int_list(value, key, line);
      for (int n : cfg.boxes)
        if (n < 1) throw config_error(line, "'boxes' entries must be >= 1");
    } else if (key == "samples") {
      cfg.samples = parse_u64(value, key, line);
      if (cfg.samples == 0) throw config_error(line, "'samples' must be >= 1");
    } else if (key == "samples_per_word") {
      cfg.samples_per_word = parse_u64(value, key, line);
    } else if (key == "workers" || key == "chains") {
      const int64_t v = parse_int(value, key, line);
      if (v < 1) throw config_error(line, "'" + key + "' must be >= 1");
      cfg.workers = static_cast<unsigned>(v);
    } else if (key == "seed") {
      cfg.master_seed = parse_u64(value, key, line);
      cfg.seed_set = true;
    } else if (key == "out") {
      cfg.out_dir = value;
    } else if (key == "sampler") {
      if (value != "auto" && value != "cftp" && value != "burnin")
        throw config_error(line, "'sampler' must be auto, cftp or burnin");
      cfg.sampler = value;
    } else if (key == "burnin") {
      const int64_t v = parse_int(value, key, line);
      if (v < 0) throw config_error(line, "'burnin' must be >= 0");
      cfg.burn_in = static_cast<int>(v);
    } else if (key == "cftp_max_sweeps") {
      cfg.cftp_max_sweeps = parse_u64(value, key, line);
      if (cfg.cftp_max_sweeps == 0)
        throw config_error(line, "'cftp_max_sweeps' must be >= 1");
    } else if (key == "k_min") {
      cfg.k_min = static_cast<int>(parse_int(value, key, line));
      if (cfg.k_min < 0) throw config_error(line, "'k_min' must be >= 0");
    } else if (key == "k_max") {
      cfg.k_max = static_cast<int>(parse_int(value, key, line));
      if (cfg.k_max < 0) throw config_error(line, "'k_max' must be >= 0");
    } else if (key == "word") {
      for (char c : value)
        if (c != '+' && c != '-')
          throw config_error(line, "'word' must be a string of + and -");
      cfg.word = value;
    } else if (key == "tail") {
      if (value != "plus" && value != "minus" && value != "both")
        throw config_error(line, "'tail' must be plus, minus or both");
      cfg.tail = value;
    } else if (key == "nl_ladder") {
      cfg.nl_ladder.clear();
      for (const std::string& tok : split(value, ',')) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos)
          throw config_error(line, "'nl_ladder' entries look like n:l");
        const int n = static_cast<int>(
            parse_int(trim(tok.substr(0, colon)), key, line));
        const int l = static_cast<int>(
            parse_int(trim(tok.substr(colon + 1)), key, line));
        if (n < 1 || l < 0)
          throw config_error(line, "'nl_ladder' needs n >= 1, l >= 0");
        cfg.nl_ladder.emplace_back(n, l);
      }
    } else if (key == "gaps") {
      cfg.gaps = parse_int_list(value, key, line);
      for (int g : cfg.gaps)
        if (g < 0) throw config_error(line, "'gaps' entries must be >= 0");
    } else if (key == "w") {
      cfg.w = static_cast<int>(parse_int(value, key, line));
      if (cfg.w < 1 || cfg.w > 4)
        throw config_error(line, "'w' must lie in [1,4]");
    } else if (key == "theta_cone") {
      cfg.theta_cone = parse_double(value, key, line);
      if (!(cfg.theta_cone > 0.0))
        throw config_error(line, "'theta_cone' must be > 0");
    } else if (key == "run_len") {
      cfg.run_len = static_cast<int>(parse_int(value, key, line));
      if (cfg.run_len < 5)
        throw config_error(line, "'run_len' must be >= 5 (rate fits need 4 points)");
    } else if (key == "collar_n") {
      cfg.collar_n = static_cast<int>(parse_int(value, key, line));
      if (cfg.collar_n < 1) throw config_error(line, "'collar_n' must be >= 1");
    } else if (key == "collar_N") {
      cfg.collar_N = parse_int_list(value, key, line);
      for (int N : cfg.collar_N)
        if (N < 1) throw config_error(line, "'collar_N' entries must be >= 1");
    } else if (key == "dec_l") {
      cfg.dec_l = static_cast<int>(parse_int(value, key, line));
      if (cfg.dec_l < 1) throw config_error(line, "'dec_l' must be >= 1");
    } else if (key == "dec_k") {
      cfg.dec_k = static_cast<int>(parse_int(value, key, line));
      if (cfg.dec_k < 0) throw config_error(line, "'dec_k' must be >= 0");
    } else if (key == "window_lo") {
      cfg.window_lo = static_cast<int>(parse_int(value, key, line));
    } else if (key == "window_hi") {
      cfg.window_hi = static_cast<int>(parse_int(value, key, line));
    } else if (key == "max_free_sites") {
      cfg.max_free_sites = static_cast<int>(parse_int(value, key, line));
      if (cfg.max_free_sites < 1 ||
          cfg.max_free_sites > kEnumerationFreeSiteCap)
        throw config_error(line, "'max_free_sites' must lie in [1," +
                                     std::to_string(kEnumerationFreeSiteCap) +
                                     "]");
    } else {
      throw config_error(line, "unknown key '" + key + "'");
    }
  }

  if (!experiment_line_seen || cfg.experiment.empty())
    throw config_error(line, "missing experiment name");
  if (cfg.k_min > cfg.k_max)
    throw config_error(line, "'k_min' must not exceed 'k_max'");
  if (consumes_randomness(cfg.experiment) && !cfg.seed_set)
    throw config_error(line,
                       "missing 'seed' (seeds are mandatory for reproducibility)");
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error(0, "cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

// --- stationarity witness ---------------------------------------------------

double heat_bath_stationarity_residual(const ExactDistribution& dist,
                                       const ModelParams& params) {
  const std::vector<Site>& free = dist.free_sites();
  const size_t states = dist.table().size();
  std::vector<double> v(dist.table());

  // locate free-site bits and fixed neighbor sums once
  const SpinConfig base = dist.realize(0);  // all free sites at -1
  const Box& box = base.box();
  const int side = box.side();

  std::vector<int> bit_of(box.site_count(), -1);
  for (size_t i = 0; i < free.size(); ++i) bit_of[box.index_of(free[i])] = static_cast<int>(i);

  double table[5];
  for (int i = 0; i < 5; ++i) table[i] = heat_bath_prob_plus(2 * i - 4, params);

  // same deterministic order as sweep_with
  for (int parity = 0; parity < 2; ++parity) {
    for (int iy = 0; iy < side; ++iy) {
      for (int ix = (parity ^ (iy & 1)); ix < side; ix += 2) {
        const int idx = iy * side + ix;
        const int bit = bit_of[idx];
        if (bit < 0) continue;  // clamped/exterior sites have no kernel
        const Site s = box.site_at(idx);

        int fixed_sum = 0;
        std::vector<int> nbr_bits;
        for (Site d : {Site{1, 0}, Site{-1, 0}, Site{0, 1}, Site{0, -1}}) {
          const Site t{s.x + d.x, s.y + d.y};
          const int tb = box.contains(t) ? bit_of[box.index_of(t)] : -1;
          if (tb >= 0)
            nbr_bits.push_back(tb);
          else
            fixed_sum += base.spin(t);
        }

        const uint32_t mask = uint32_t{1} << bit;
        for (uint32_t st = 0; st < states; ++st) {
          if (st & mask) continue;
          int sum = fixed_sum;
          for (int nb : nbr_bits) sum += (st >> nb & 1) ? 1 : -1;
          const double p = table[(sum + 4) >> 1];
          const uint32_t partner = st | mask;
          const double m = v[st] + v[partner];
          v[st] = m * (1.0 - p);
          v[partner] = m * p;
        }
      }
    }
  }

  double residual = 0.0;
  for (size_t i = 0; i < states; ++i)
    residual = std::max(residual, std::fabs(v[i] - dist.table()[i]));
  return residual;
}

// --- experiment plumbing ----------------------------------------------------

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

struct RunContext {
  const RunConfig& cfg;
  EstimatorOptions opts;
  fs::path out;
  std::ostream& log;
  RunOutcome outcome;

  std::string path(const std::string& name) {
    outcome.output_files.push_back((out / name).string());
    return outcome.output_files.back();
  }
  void check(StatCheck c) {
    if (!c.pass) outcome.exit_status = 2;
    outcome.checks.push_back(std::move(c));
  }
};

int primary_box(const RunConfig& cfg, int fallback) {
  return cfg.boxes.empty() ? fallback : cfg.boxes.front();
}

std::vector<int> ladder_or(const std::vector<int>& v,
                           std::vector<int> fallback) {
  return v.empty() ? fallback : v;
}

SamplerOptions sampler_options(const RunConfig& cfg) {
  SamplerOptions s;
  if (cfg.sampler == "cftp")
    s.method = SampleMethod::cftp;
  else if (cfg.sampler == "burnin")
    s.method = SampleMethod::burn_in;
  else
    s.method = SampleMethod::auto_select;
  s.burn_in_sweeps = cfg.burn_in;
  s.cftp_max_sweeps = cfg.cftp_max_sweeps;
  return s;
}

std::string sign_cell(int8_t sign) { return sign > 0 ? "+" : "-"; }

// --- oracle-check -----------------------------------------------------------

struct OracleGeometry {
  std::string name;
  SpinConfig frame;
};

std::vector<OracleGeometry> oracle_geometries(int max_free_sites) {
  std::vector<OracleGeometry> out;

  {  // one free site, everything else boundary data
    SpinConfig f(Box(1), +1, +1);
    for (int i = 0; i < f.box().site_count(); ++i) {
      const Site s = f.box().site_at(i);
      if (!(s == Site{0, 0})) f.set_exterior(s, +1);
    }
    out.push_back({"single", std::move(f)});
  }
  {  // 2x2 block inside a 3x3 box
    SpinConfig f(Box(1), +1, +1);
    for (int i = 0; i < f.box().site_count(); ++i) {
      const Site s = f.box().site_at(i);
      const bool in_block = (s.x == 0 || s.x == 1) && (s.y == 0 || s.y == 1);
      if (!in_block) f.set_exterior(s, +1);
    }
    out.push_back({"2x2", std::move(f)});
  }
  {  // 2x3 block inside a 5x5 box
    SpinConfig f(Box(2), +1, +1);
    for (int i = 0; i < f.box().site_count(); ++i) {
      const Site s = f.box().site_at(i);
      const bool in_block = (s.x >= -1 && s.x <= 1) && (s.y == 0 || s.y == 1);
      if (!in_block) f.set_exterior(s, +1);
    }
    out.push_back({"2x3", std::move(f)});
  }
  {  // full 3x3 box
    out.push_back({"3x3", SpinConfig(Box(1), +1, +1)});
  }

  std::erase_if(out, [&](const OracleGeometry& g) {
    return g.frame.free_count() > max_free_sites;
  });
  return out;
}

void run_oracle_check(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::vector<double> betas =
      cfg.betas.empty() ? std::vector<double>{0.3, 0.44, 0.7} : cfg.betas;
  const std::vector<OracleGeometry> geometries =
      oracle_geometries(cfg.max_free_sites);

  CsvWriter csv(ctx.path("oracle.csv"),
                {"test", "geometry", "beta", "statistic", "df", "p_value",
                 "pass", "seed"});

  uint64_t stream = 0;
  for (const OracleGeometry& geo : geometries) {
    for (double beta : betas) {
      const ModelParams params{beta, cfg.h, cfg.field_sign};
      const ExactDistribution dist = enumerate_measure(geo.frame, params);
      const uint64_t seed = mix_seed(cfg.master_seed, stream++);

      {  // perfect-sampling draws against the exact table
        SamplerOptions cftp_only;
        cftp_only.method = SampleMethod::cftp;
        cftp_only.cftp_max_sweeps = cfg.cftp_max_sweeps;
        cftp_only.allow_fallback = false;

        const auto draws = parallel_map<uint32_t>(
            cfg.samples, ctx.opts.workers, [&](size_t i) {
              const SpinConfig d = draw_conditioned(geo.frame, params,
                                                    mix_seed(seed, i),
                                                    cftp_only);
              return dist.encode(d);
            });
        std::vector<uint64_t> counts(dist.table().size(), 0);
        for (uint32_t stt : draws) ++counts[stt];
        const ChiSquareResult chi =
            chi_square_gof(counts, dist.table());
        StatCheck c{"cftp-chisq/" + geo.name + "/beta=" + format_double(beta),
                    chi.statistic, chi.p_value, chi.p_value >= 0.01};
        csv.row({"cftp-chisq", geo.name, format_double(beta),
                 format_double(chi.statistic), CsvWriter::cell(chi.df),
                 format_double(chi.p_value), c.pass ? "1" : "0",
                 CsvWriter::cell(seed)});
        ctx.check(std::move(c));
      }

      {  // one checkerboard sweep fixes the exact distribution
        const double residual = heat_bath_stationarity_residual(dist, params);
        StatCheck c{"heatbath-residual/" + geo.name +
                        "/beta=" + format_double(beta),
                    residual, 1.0, residual < 1e-10};
        csv.row({"heatbath-residual", geo.name, format_double(beta),
                 format_double(residual), "0", "1", c.pass ? "1" : "0",
                 CsvWriter::cell(seed)});
        ctx.check(std::move(c));
      }

      if (geo.frame.free_count() == geo.frame.box().site_count() &&
          cfg.h == 0.0) {
        // exact draw + one cluster sweep must stay exactly stationary
        const uint64_t sw_seed = mix_seed(cfg.master_seed, stream++);
        const auto draws = parallel_map<uint32_t>(
            cfg.samples, ctx.opts.workers, [&](size_t i) {
              Rng rng(mix_seed(sw_seed, i));
              ChainState chain(dist.sample(rng), rng.raw());
              swendsen_wang_sweep(chain, params);
              return dist.encode(chain.config);
            });
        std::vector<uint64_t> counts(dist.table().size(), 0);
        for (uint32_t stt : draws) ++counts[stt];
        const ChiSquareResult chi = chi_square_gof(counts, dist.table());
        StatCheck c{"sw-chisq/" + geo.name + "/beta=" + format_double(beta),
                    chi.statistic, chi.p_value, chi.p_value >= 0.01};
        csv.row({"sw-chisq", geo.name, format_double(beta),
                 format_double(chi.statistic), CsvWriter::cell(chi.df),
                 format_double(chi.p_value), c.pass ? "1" : "0",
                 CsvWriter::cell(sw_seed)});
        ctx.check(std::move(c));
      }
    }
  }
  ctx.log << "oracle-check: " << ctx.outcome.checks.size() << " checks\n";
}

// --- sample -----------------------------------------------------------------

void run_sample(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const ModelParams params = cfg.params();
  const std::vector<int> boxes = ladder_or(cfg.boxes, {8, 16, 32});

  CsvWriter csv(ctx.path("samples.csv"),
                {"beta", "h", "n", "draw", "magnetization", "file", "seed"});

  for (size_t bi = 0; bi < boxes.size(); ++bi) {
    const int n = boxes[bi];
    const SpinConfig frame(Box(n), +1, +1);
    const uint64_t box_seed = mix_seed(cfg.master_seed, bi);

    const auto draws = parallel_map<std::pair<double, uint64_t>>(
        cfg.samples, ctx.opts.workers, [&](size_t i) {
          const uint64_t draw_seed = mix_seed(box_seed, i);
          const SpinConfig d = draw_conditioned(frame, params, draw_seed,
                                                ctx.opts.sampler);
          double mag = 0.0;
          for (int idx = 0; idx < d.box().site_count(); ++idx)
            mag += d.spin(d.box().site_at(idx));
          mag /= d.box().site_count();

          const std::string name = "snapshot_n" + std::to_string(n) + "_d" +
                                   std::to_string(i) + ".txt";
          std::ofstream out(ctx.out / name, std::ios::binary);
          write_spin_snapshot(out, d, params.beta, params.h, draw_seed);
          return std::make_pair(mag, draw_seed);
        });

    for (size_t i = 0; i < draws.size(); ++i) {
      const std::string name =
          "snapshot_n" + std::to_string(n) + "_d" + std::to_string(i) + ".txt";
      ctx.outcome.output_files.push_back((ctx.out / name).string());
      csv.row({format_double(params.beta), format_double(params.h),
               CsvWriter::cell(n), CsvWriter::cell(static_cast<uint64_t>(i)),
               format_double(draws[i].first), name,
               CsvWriter::cell(draws[i].second)});
    }
  }
  ctx.log << "sample: wrote snapshots for " << boxes.size() << " box sizes\n";
}

// --- g-estimate -------------------------------------------------------------

void run_g_estimate(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const ModelParams params = cfg.params();
  const std::vector<std::pair<int, int>> ladder =
      cfg.nl_ladder.empty()
          ? std::vector<std::pair<int, int>>{{8, 8}, {16, 16}, {32, 32}}
          : cfg.nl_ladder;

  CsvWriter csv(ctx.path("gfun.csv"),
                {"beta", "n", "l", "tail", "word", "p_plus", "stderr",
                 "coalesced", "seed"});

  std::vector<int8_t> word;
  for (char c : cfg.word) word.push_back(c == '+' ? int8_t{1} : int8_t{-1});

  struct Rung {
    int n, l;
    GGapEstimate gap;
  };
  std::vector<Rung> rungs;

  for (size_t ri = 0; ri < ladder.size(); ++ri) {
    const auto [n, l] = ladder[ri];
    if (static_cast<int>(word.size()) > n)
      throw dimension_error("word longer than the ladder rung's recent window");
    const uint64_t rung_seed = mix_seed(cfg.master_seed, ri);
    const GGapEstimate gap = estimate_g_gap(word, params, n + l, n + l,
                                            cfg.samples, rung_seed, ctx.opts);
    for (const GEstimate* g : {&gap.minus_tail, &gap.plus_tail}) {
      const bool is_plus_tail = g == &gap.plus_tail;
      if (cfg.tail == "plus" && !is_plus_tail) continue;
      if (cfg.tail == "minus" && is_plus_tail) continue;
      csv.row({format_double(params.beta), CsvWriter::cell(n),
               CsvWriter::cell(l), is_plus_tail ? "plus" : "minus", cfg.word,
               format_double(g->value.value), format_double(g->value.std_err),
               g->approximate ? "0" : "1", CsvWriter::cell(rung_seed)});
    }
    ctx.check({"g-order-violations/rung=" + std::to_string(ri),
               static_cast<double>(gap.order_violations), 1.0,
               gap.order_violations == 0});
    rungs.push_back({n, l, gap});
  }

  // stabilization: successive rungs within 2 pooled stderr
  int stabilized_at = -1;
  for (size_t i = 1; i < rungs.size(); ++i) {
    const auto& a = rungs[i - 1].gap.plus_tail.value;
    const auto& b = rungs[i].gap.plus_tail.value;
    const double pooled =
        std::sqrt(a.std_err * a.std_err + b.std_err * b.std_err);
    if (std::fabs(a.value - b.value) <= 2.0 * pooled) {
      stabilized_at = static_cast<int>(i);
      break;
    }
  }
  ctx.check({"g-ladder-stabilized", static_cast<double>(stabilized_at), 1.0,
             true});
  ctx.log << "g-estimate: " << rungs.size() << " rungs, stabilized at level "
          << stabilized_at << "\n";
}

// --- vark -------------------------------------------------------------------

void run_vark(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const ModelParams params = cfg.params();
  const int box_n = primary_box(cfg, std::max(8, cfg.k_max));
  const uint64_t per_word =
      cfg.samples_per_word ? cfg.samples_per_word : cfg.samples;
  const WordSource source = cfg.k_max <= 10
                                ? WordSource::exhaustive
                                : WordSource::sampled_from_projection;

  const std::vector<VarkEstimate> curve =
      estimate_vark_curve(params, cfg.k_min, cfg.k_max, source,
                          /*word_count=*/128, box_n, per_word,
                          cfg.master_seed, ctx.opts);

  CsvWriter csv(ctx.path("vark.csv"),
                {"beta", "k", "vark_lb", "stderr", "words_examined", "seed"});
  uint64_t violations = 0;
  for (const VarkEstimate& v : curve) {
    violations += v.order_violations;
    csv.row({format_double(params.beta), CsvWriter::cell(v.k),
             format_double(v.lower_bound.value),
             format_double(v.lower_bound.std_err),
             CsvWriter::cell(v.words_examined),
             CsvWriter::cell(cfg.master_seed)});
  }
  ctx.check({"vark-order-violations", static_cast<double>(violations), 1.0,
             violations == 0});
  ctx.log << "vark: k in [" << cfg.k_min << "," << cfg.k_max << "], box "
          << box_n << "\n";
}

// --- theta / prop-domi ------------------------------------------------------

void write_theta_rows(CsvWriter& csv, const RunConfig& cfg,
                      const RunProbability& runs, uint64_t seed) {
  for (int k = 1; k <= runs.run_length; ++k) {
    const auto [log_p, se] = runs.log_prefix(k);
    csv.row({format_double(cfg.beta), sign_cell(runs.sign),
             CsvWriter::cell(k), format_double(log_p), format_double(se),
             CsvWriter::cell(seed)});
  }
}

void run_theta(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const ModelParams params = cfg.params();
  const int box_n = primary_box(cfg, std::max(32, 2 * cfg.run_len));

  CsvWriter csv(ctx.path("theta.csv"),
                {"beta", "sign", "n", "log_prob", "stderr", "seed"});
  for (int8_t sign : {int8_t{-1}, int8_t{+1}}) {
    const uint64_t seed = mix_seed(cfg.master_seed, sign > 0 ? 2 : 1);
    const RunProbability runs = estimate_run_probability(
        params, sign, cfg.run_len, box_n, cfg.samples, seed, ctx.opts);
    write_theta_rows(csv, cfg, runs, seed);

    std::vector<RatePoint> pts;
    for (int k = 2; k <= cfg.run_len; ++k) {
      auto [log_p, se] = runs.log_prefix(k);
      pts.push_back({k, log_p, se});
    }
    const RateEstimate rate = fit_theta(pts);
    ctx.check({std::string("theta-fit-r2/sign=") + (sign > 0 ? "+" : "-"),
               rate.r2, 1.0, true});
    ctx.log << "theta(" << (sign > 0 ? "+" : "-")
            << "-run) = " << rate.theta << " +- " << rate.theta_se << "\n";
  }
}

void run_prop_domi(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const ModelParams params = cfg.params();
  const int box_n = primary_box(cfg, std::max(32, 2 * cfg.run_len));

  const DominationReport report = check_prop_domi(
      params, box_n, cfg.run_len, cfg.samples, cfg.master_seed, ctx.opts);

  CsvWriter theta_csv(ctx.path("theta.csv"),
                      {"beta", "sign", "n", "log_prob", "stderr", "seed"});
  for (const RateEstimate* rate : {&report.theta_plus, &report.theta_minus}) {
    for (const RatePoint& p : rate->points)
      theta_csv.row({format_double(cfg.beta), sign_cell(rate->run_sign),
                     CsvWriter::cell(p.n), format_double(p.log_prob),
                     format_double(p.se), CsvWriter::cell(cfg.master_seed)});
  }

  CsvWriter rates_csv(ctx.path("rates.csv"),
                      {"beta", "theta_plus", "theta_minus", "rho_witness", "z",
                       "p_value", "seed"});
  rates_csv.row({format_double(cfg.beta), format_double(report.theta_plus.theta),
                 format_double(report.theta_minus.theta),
                 format_double(report.rho_witness), format_double(report.test.z),
                 format_double(report.test.p_value),
                 CsvWriter::cell(cfg.master_seed)});

  ctx.check({"prop-domi-ordering", report.test.z, report.test.p_value,
             report.test.reject});
  ctx.log << "prop-domi: theta_+ = " << report.theta_plus.theta
          << ", theta_- = " << report.theta_minus.theta
          << ", z = " << report.test.z << "\n";
}

// --- mixing -----------------------------------------------------------------

void write_mixing_csv(RunContext& ctx, const MixingCurve& curve) {
  CsvWriter csv(ctx.path("mixing.csv"),
                {"beta", "region", "theta_cone", "gap", "w", "coefficient",
                 "stderr", "seed"});
  uint64_t violations = 0;
  for (const MixingPoint& p : curve.points) {
    violations += p.order_violations;
    csv.row({format_double(ctx.cfg.beta), curve.region,
             format_double(curve.theta_cone), CsvWriter::cell(p.gap),
             CsvWriter::cell(curve.w), format_double(p.coefficient),
             format_double(p.se), CsvWriter::cell(ctx.cfg.master_seed)});
  }
  ctx.check({"mixing-order-violations", static_cast<double>(violations), 1.0,
             violations == 0});
  if (curve.points.size() >= 2) {
    const MixingPoint& first = curve.points.front();
    const MixingPoint& last = curve.points.back();
    const double pooled =
        std::sqrt(first.se * first.se + last.se * last.se);
    ctx.check({"mixing-decreasing", first.coefficient - last.coefficient, 1.0,
               last.coefficient < first.coefficient - 3.0 * pooled});
  }
}

void run_phi_mixing(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::vector<int> gaps = ladder_or(cfg.gaps, {2, 4, 8, 16});
  const int need = *std::max_element(gaps.begin(), gaps.end()) + cfg.w;
  const int box_n = primary_box(cfg, std::max(24, need));
  const MixingCurve curve =
      estimate_phi_mixing(cfg.params(), gaps, cfg.w, box_n, cfg.samples,
                          cfg.master_seed, ctx.opts);
  write_mixing_csv(ctx, curve);
  ctx.log << "phi-mixing: " << curve.points.size() << " gaps, box " << box_n
          << "\n";
}

void run_cone_mixing(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::vector<int> gaps = ladder_or(cfg.gaps, {2, 4, 8, 16});
  const int need = *std::max_element(gaps.begin(), gaps.end()) + cfg.w;
  const int box_n = primary_box(cfg, std::max(24, need));
  const MixingCurve curve = estimate_cone_mixing(
      cfg.params(), cfg.theta_cone, gaps, cfg.w, box_n, cfg.samples,
      cfg.master_seed, ctx.opts);
  write_mixing_csv(ctx, curve);
  ctx.log << "cone-mixing: theta = " << cfg.theta_cone << ", box " << box_n
          << "\n";
}

// --- two-sided probe --------------------------------------------------------

void run_two_sided(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const std::vector<int> ladder = ladder_or(cfg.collar_N, {8, 16, 32});
  const int box_n = primary_box(
      cfg, *std::max_element(ladder.begin(), ladder.end()) + 8);

  CsvWriter csv(ctx.path("twosided.csv"),
                {"beta", "n", "N", "side", "magnetization", "stderr",
                 "samples", "seed"});

  std::vector<double> xs, one_mag, one_se, two_mag, two_se;
  for (size_t i = 0; i < ladder.size(); ++i) {
    const int N = ladder[i];
    const uint64_t seed = mix_seed(cfg.master_seed, i);
    const TwoSidedReport rep = two_sided_probe(
        cfg.params(), cfg.collar_n, N, box_n, cfg.samples, seed, ctx.opts);
    csv.row({format_double(cfg.beta), CsvWriter::cell(cfg.collar_n),
             CsvWriter::cell(N), "one", format_double(rep.one_sided.value),
             format_double(rep.one_sided.std_err),
             CsvWriter::cell(cfg.samples), CsvWriter::cell(seed)});
    csv.row({format_double(cfg.beta), CsvWriter::cell(cfg.collar_n),
             CsvWriter::cell(N), "two", format_double(rep.two_sided.value),
             format_double(rep.two_sided.std_err),
             CsvWriter::cell(cfg.samples), CsvWriter::cell(seed)});
    xs.push_back(N);
    one_mag.push_back(rep.one_sided.value);
    one_se.push_back(rep.one_sided.std_err);
    two_mag.push_back(rep.two_sided.value);
    two_se.push_back(rep.two_sided.std_err);
  }

  if (xs.size() >= 3) {
    const ZTest trend = decreasing_trend_test(xs, two_mag, two_se);
    ctx.check({"two-sided-decreasing", trend.z, trend.p_value, trend.reject});
    const double pooled = std::sqrt(one_se.front() * one_se.front() +
                                    one_se.back() * one_se.back());
    const double drift = std::fabs(one_mag.back() - one_mag.front());
    ctx.check({"one-sided-stable", drift, 1.0, drift <= 2.0 * pooled});
  }
  ctx.log << "two-sided-probe: N ladder of " << ladder.size() << ", box "
          << box_n << "\n";
}

// --- duality ----------------------------------------------------------------

void run_duality(RunContext& ctx) {
  CsvWriter csv(ctx.path("duality.csv"),
                {"quantity", "input", "output", "seed"});
  const std::string seed_cell = CsvWriter::cell(ctx.cfg.master_seed);

  for (int i = 0; i <= 20; ++i) {
    const double p = i / 20.0;
    csv.row({"dual_p", format_double(p), format_double(dual_p(p)), seed_cell});
  }
  const double fixed = 2.0 - std::sqrt(2.0);
  csv.row({"dual_p_fixed_point", format_double(fixed),
           format_double(dual_p(fixed)), seed_cell});
  for (double beta : {0.2, 0.3, beta_critical, 0.6, 0.8, 1.2}) {
    csv.row({"dual_beta", format_double(beta), format_double(dual_beta(beta)),
             seed_cell});
  }

  ctx.log << "duality: fixed point p* = " << format_double(fixed)
          << ", dual_p(p*) = " << format_double(dual_p(fixed)) << "\n";
  ctx.log << "duality: beta_c = " << format_double(beta_critical)
          << ", dual_beta(beta_c) = " << format_double(dual_beta(beta_critical))
          << "\n";
}

// --- decimate ---------------------------------------------------------------

void run_decimate(RunContext& ctx) {
  const RunConfig& cfg = ctx.cfg;
  const int box_n = primary_box(cfg, 16);
  const int lo = (cfg.window_lo == 0 && cfg.window_hi == 0) ? -box_n
                                                            : cfg.window_lo;
  const int hi = (cfg.window_lo == 0 && cfg.window_hi == 0) ? box_n
                                                            : cfg.window_hi;
  const SpinConfig frame(Box(box_n), +1, +1);

  CsvWriter csv(ctx.path("decimate.csv"),
                {"beta", "n", "l", "k", "draw", "x", "spin", "seed"});
  for (uint64_t d = 0; d < cfg.samples; ++d) {
    const uint64_t seed = mix_seed(cfg.master_seed, d);
    const SpinConfig config =
        draw_conditioned(frame, cfg.params(), seed, ctx.opts.sampler);
    const LineConfig line = decimate(project(config, lo, hi), cfg.dec_l,
                                     cfg.dec_k);
    for (size_t i = 0; i < line.sites.size(); ++i) {
      csv.row({format_double(cfg.beta), CsvWriter::cell(box_n),
               CsvWriter::cell(cfg.dec_l), CsvWriter::cell(cfg.dec_k),
               CsvWriter::cell(d), CsvWriter::cell(line.sites[i]),
               CsvWriter::cell(static_cast<int>(line.spins[i])),
               CsvWriter::cell(seed)});
    }
  }
  ctx.log << "decimate: kept pattern l=" << cfg.dec_l << " k=" << cfg.dec_k
          << " over [" << lo << "," << hi << "]\n";
}

// --- manifest ---------------------------------------------------------------

json config_json(const RunConfig& cfg) {
  json j;
  j["experiment"] = cfg.experiment;
  j["beta"] = cfg.beta;
  j["h"] = cfg.h;
  j["field_sign"] = cfg.field_sign == FieldSign::paper_literal
                        ? "paper_literal"
                        : "conventional";
  j["betas"] = cfg.betas;
  j["boxes"] = cfg.boxes;
  j["samples"] = cfg.samples;
  j["samples_per_word"] = cfg.samples_per_word;
  j["seed"] = cfg.master_seed;
  j["out"] = cfg.out_dir;
  j["sampler"] = cfg.sampler;
  j["burnin"] = cfg.burn_in;
  j["cftp_max_sweeps"] = cfg.cftp_max_sweeps;
  j["k_min"] = cfg.k_min;
  j["k_max"] = cfg.k_max;
  j["word"] = cfg.word;
  j["tail"] = cfg.tail;
  json ladder = json::array();
  for (auto [n, l] : cfg.nl_ladder) ladder.push_back({{"n", n}, {"l", l}});
  j["nl_ladder"] = ladder;
  j["gaps"] = cfg.gaps;
  j["w"] = cfg.w;
  j["theta_cone"] = cfg.theta_cone;
  j["run_len"] = cfg.run_len;
  j["collar_n"] = cfg.collar_n;
  j["collar_N"] = cfg.collar_N;
  j["dec_l"] = cfg.dec_l;
  j["dec_k"] = cfg.dec_k;
  j["window_lo"] = cfg.window_lo;
  j["window_hi"] = cfg.window_hi;
  j["max_free_sites"] = cfg.max_free_sites;
  return j;
}

void write_manifest(RunContext& ctx, double wall_seconds) {
  json j;
  j["artifact_version"] = artifact_version;
  j["experiment"] = ctx.cfg.experiment;
  j["config"] = config_json(ctx.cfg);
  j["wall_clock_seconds"] = wall_seconds;
  j["exit_status"] = ctx.outcome.exit_status;

  json outputs = json::array();
  for (const std::string& file : ctx.outcome.output_files) {
    outputs.push_back({{"file", fs::path(file).filename().string()},
                       {"bytes", fs::file_size(file)},
                       {"fnv1a64", fnv1a64_hex(fnv1a64_file(file))}});
  }
  j["outputs"] = outputs;

  json checks = json::array();
  for (const StatCheck& c : ctx.outcome.checks) {
    checks.push_back({{"name", c.name},
                      {"statistic", c.statistic},
                      {"p_value", c.p_value},
                      {"pass", c.pass}});
  }
  j["statistical_checks"] = checks;

  const fs::path tmp = ctx.out / "run_manifest.json.tmp";
  const fs::path dst = ctx.out / "run_manifest.json";
  {
    std::ofstream out(tmp, std::ios::binary);
    out << j.dump(2) << "\n";
  }
  fs::rename(tmp, dst);
}

}  // namespace

RunOutcome run_experiment(const RunConfig& config, std::ostream& log) {
  RunContext ctx{config,
                 EstimatorOptions{sampler_options(config),
                                  config.workers ? config.workers
                                                 : default_worker_count()},
                 fs::path(config.out_dir), log, RunOutcome{}};
  fs::create_directories(ctx.out);

  const bool needs_beta =
      config.experiment != "duality" && config.experiment != "oracle-check";
  if (needs_beta && !(config.beta > 0.0))
    throw unsupported_parameter("experiment '" + config.experiment +
                                "' needs beta > 0");

  const auto start = std::chrono::steady_clock::now();
  if (config.experiment == "oracle-check")
    run_oracle_check(ctx);
  else if (config.experiment == "sample")
    run_sample(ctx);
  else if (config.experiment == "g-estimate")
    run_g_estimate(ctx);
  else if (config.experiment == "vark")
    run_vark(ctx);
  else if (config.experiment == "theta")
    run_theta(ctx);
  else if (config.experiment == "prop-domi")
    run_prop_domi(ctx);
  else if (config.experiment == "phi-mixing")
    run_phi_mixing(ctx);
  else if (config.experiment == "cone-mixing")
    run_cone_mixing(ctx);
  else if (config.experiment == "two-sided-probe")
    run_two_sided(ctx);
  else if (config.experiment == "duality")
    run_duality(ctx);
  else if (config.experiment == "decimate")
    run_decimate(ctx);
  else
    throw unsupported_parameter("unknown experiment '" + config.experiment + "'");

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  write_manifest(ctx, wall);
  return std::move(ctx.outcome);
}

}  // namespace schonmann
