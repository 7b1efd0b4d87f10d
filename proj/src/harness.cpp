#include "daimc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "daimc/error.hpp"
#include "daimc/evaluation.hpp"
#include "daimc/seminmf.hpp"

namespace daimc::harness {

namespace fs = std::filesystem;
using data::MultiViewDataset;
using Index = Eigen::Index;
using nlohmann::json;

const char* to_string(Method m) {
  switch (m) {
    case Method::daimc:
      return "daimc";
    case Method::seminmf_concat:
      return "seminmf_concat";
    case Method::seminmf_fill:
      return "seminmf_fill";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "daimc") return Method::daimc;
  if (name == "seminmf_concat") return Method::seminmf_concat;
  if (name == "seminmf_fill") return Method::seminmf_fill;
  throw InvalidInput("unknown method '" + name + "'");
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

// ---------------------------------------------------------------------------
// Configuration

void validate(const ExperimentConfig& cfg) {
  if (!cfg.data.manifest && !cfg.data.synth)
    throw InvalidInput("config: a manifest path or a synth spec is required");
  if (cfg.rates.empty() || cfg.alphas.empty() || cfg.betas.empty() || cfg.seeds.empty() ||
      cfg.methods.empty())
    throw InvalidInput("config: rates, alphas, betas, seeds and methods must be nonempty");
  for (double r : cfg.rates)
    if (!(r >= 0.0 && r <= 0.5)) throw InvalidInput("config: rate " + format_double(r) + " outside [0, 0.5]");
  for (Index n : cfg.view_counts)
    if (n < 1) throw InvalidInput("config: view counts must be >= 1");
  if (cfg.k && *cfg.k < 1) throw InvalidInput("config: k must be >= 1");
  if (cfg.kmeans_restarts < 1) throw InvalidInput("config: kmeans_restarts must be >= 1");
  if (cfg.workers < 1) throw InvalidInput("config: workers must be >= 1");
}

data::SynthSpec synth_spec_from_json(const json& j) {
  data::SynthSpec s;
  try {
    s.n_per_cluster = j.value("n_per_cluster", s.n_per_cluster);
    s.k_clusters = j.value("k_clusters", s.k_clusters);
    s.n_views = j.value("n_views", s.n_views);
    if (j.contains("dims")) {
      s.dims = j.at("dims").get<std::vector<Index>>();
    } else {
      s.dims.assign(static_cast<std::size_t>(s.n_views), 10);
    }
    s.separation = j.value("separation", s.separation);
    s.noise_sd = j.value("noise_sd", s.noise_sd);
    s.seed = j.value("seed", s.seed);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("synth spec: ") + e.what());
  }
  return s;
}

json to_json(const data::SynthSpec& s) {
  return {{"n_per_cluster", s.n_per_cluster}, {"k_clusters", s.k_clusters},
          {"n_views", s.n_views},             {"dims", s.dims},
          {"separation", s.separation},       {"noise_sd", s.noise_sd},
          {"seed", s.seed}};
}

ExperimentConfig config_from_json(const json& j, const fs::path& base) {
  ExperimentConfig cfg;
  try {
    const json& d = j.at("data");
    if (d.contains("manifest")) {
      fs::path p = d.at("manifest").get<std::string>();
      cfg.data.manifest = p.is_relative() && !base.empty() ? base / p : p;
    }
    if (d.contains("synth")) cfg.data.synth = synth_spec_from_json(d.at("synth"));
    if (j.contains("rates")) cfg.rates = j.at("rates").get<std::vector<double>>();
    if (j.contains("alphas")) cfg.alphas = j.at("alphas").get<std::vector<double>>();
    if (j.contains("betas")) cfg.betas = j.at("betas").get<std::vector<double>>();
    if (j.contains("seeds")) cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    if (j.contains("methods")) {
      cfg.methods.clear();
      for (const auto& m : j.at("methods")) cfg.methods.push_back(method_from_string(m.get<std::string>()));
    }
    if (j.contains("k") && !j.at("k").is_null()) cfg.k = j.at("k").get<Index>();
    if (j.contains("view_counts")) cfg.view_counts = j.at("view_counts").get<std::vector<Index>>();
    cfg.fit.outer_tol = j.value("outer_tol", cfg.fit.outer_tol);
    cfg.fit.inner_tol = j.value("inner_tol", cfg.fit.inner_tol);
    cfg.fit.outer_max = j.value("outer_max", cfg.fit.outer_max);
    cfg.fit.inner_max = j.value("inner_max", cfg.fit.inner_max);
    cfg.fit.epsilon = j.value("epsilon", cfg.fit.epsilon);
    if (j.contains("regression_form")) {
      const std::string form = j.at("regression_form").get<std::string>();
      if (form == "woodbury") {
        cfg.fit.regression_form = model::RegressionForm::woodbury;
      } else if (form == "direct") {
        cfg.fit.regression_form = model::RegressionForm::direct;
      } else {
        throw InvalidInput("config: regression_form must be 'woodbury' or 'direct'");
      }
    }
    cfg.kmeans_restarts = j.value("kmeans_restarts", cfg.kmeans_restarts);
    cfg.workers = j.value("workers", cfg.workers);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

json to_json(const ExperimentConfig& cfg) {
  json j;
  j["data"] = json::object();
  if (cfg.data.manifest) j["data"]["manifest"] = cfg.data.manifest->string();
  if (cfg.data.synth) j["data"]["synth"] = to_json(*cfg.data.synth);
  j["rates"] = cfg.rates;
  j["alphas"] = cfg.alphas;
  j["betas"] = cfg.betas;
  j["seeds"] = cfg.seeds;
  j["methods"] = json::array();
  for (Method m : cfg.methods) j["methods"].push_back(to_string(m));
  j["k"] = cfg.k ? json(*cfg.k) : json(nullptr);
  j["view_counts"] = cfg.view_counts;
  j["outer_tol"] = cfg.fit.outer_tol;
  j["inner_tol"] = cfg.fit.inner_tol;
  j["outer_max"] = cfg.fit.outer_max;
  j["inner_max"] = cfg.fit.inner_max;
  j["epsilon"] = cfg.fit.epsilon;
  j["regression_form"] =
      cfg.fit.regression_form == model::RegressionForm::woodbury ? "woodbury" : "direct";
  j["kmeans_restarts"] = cfg.kmeans_restarts;
  return j;
}

// ---------------------------------------------------------------------------
// Data preparation

MultiViewDataset load_source(const DataSource& src) {
  if (src.manifest) {
    try {
      return data::load_manifest(*src.manifest);
    } catch (const std::exception& e) {
      throw StageError("load_manifest", e.what());
    }
  }
  if (src.synth) {
    try {
      return data::synth_planted(*src.synth);
    } catch (const std::exception& e) {
      throw StageError("synth", e.what());
    }
  }
  throw StageError("config", "no data source configured");
}

Matrix fill_and_concatenate(const MultiViewDataset& ds) {
  Index rows = 0;
  for (const Matrix& x : ds.views()) rows += x.rows();
  Matrix out(rows, ds.n_instances());
  Index offset = 0;
  for (Index v = 0; v < ds.n_views(); ++v) {
    const Matrix& x = ds.view(v);
    const Vector w = ds.indicator().weights(v);
    const Vector mean = (x * w) / w.sum();
    for (Index j = 0; j < ds.n_instances(); ++j)
      out.block(offset, j, x.rows(), 1) = ds.indicator().present(v, j) ? Vector(x.col(j)) : mean;
    offset += x.rows();
  }
  return out;
}

std::pair<Matrix, std::vector<Index>> concatenate_complete(const MultiViewDataset& ds) {
  std::vector<Index> keep;
  for (Index j = 0; j < ds.n_instances(); ++j) {
    bool all = true;
    for (Index v = 0; v < ds.n_views(); ++v) all = all && ds.indicator().present(v, j);
    if (all) keep.push_back(j);
  }
  Index rows = 0;
  for (const Matrix& x : ds.views()) rows += x.rows();
  Matrix out(rows, static_cast<Index>(keep.size()));
  Index offset = 0;
  for (const Matrix& x : ds.views()) {
    for (std::size_t c = 0; c < keep.size(); ++c)
      out.block(offset, static_cast<Index>(c), x.rows(), 1) = x.col(keep[c]);
    offset += x.rows();
  }
  return {std::move(out), std::move(keep)};
}

// ---------------------------------------------------------------------------
// Cells

namespace {

Index distinct_labels(const MultiViewDataset& ds) {
  if (!ds.labels()) return 0;
  return static_cast<Index>(std::set<int>(ds.labels()->begin(), ds.labels()->end()).size());
}

Index resolve_k(const ExperimentConfig& cfg, const MultiViewDataset& ds) {
  if (cfg.k) return *cfg.k;
  const Index k = distinct_labels(ds);
  if (k < 1) throw StageError("config", "k is not set and the dataset has no labels");
  return k;
}

Matrix column_normalized(Matrix v) {
  for (Index c = 0; c < v.cols(); ++c) {
    const double s = v.col(c).sum();
    if (s > 0.0) v.col(c) /= s;
  }
  return v;
}

template <typename Fn>
auto staged(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

void score(CellOutput& out, const MultiViewDataset& ds, const Matrix& latent, Index k,
           std::uint64_t seed, const ExperimentConfig& cfg,
           const std::vector<Index>* instances) {
  eval::KMeansOptions km;
  km.restarts = cfg.kmeans_restarts;
  const eval::ClusterResult cr =
      staged("kmeans", [&] { return eval::kmeans(latent, static_cast<int>(k), seed, km); });
  out.assignments = cr.assignments;
  out.record.n_evaluated = latent.rows();
  if (!ds.labels()) return;
  std::vector<int> truth;
  if (instances) {
    for (Index j : *instances) truth.push_back((*ds.labels())[static_cast<std::size_t>(j)]);
  } else {
    truth = *ds.labels();
  }
  staged("metrics", [&] {
    out.record.nmi = eval::nmi(truth, cr.assignments);
    out.record.ac = eval::accuracy(truth, cr.assignments);
    return 0;
  });
  out.record.has_metrics = true;
}

}  // namespace

CellOutput run_cell(const MultiViewDataset& masked, Method method, double alpha, double beta,
                    std::uint64_t seed, const ExperimentConfig& cfg) {
  CellOutput out;
  CellRecord& rec = out.record;
  rec.method = method;
  rec.n_views = masked.n_views();
  rec.alpha = alpha;
  rec.beta = beta;
  rec.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    const Index k = staged("config", [&] { return resolve_k(cfg, masked); });
    if (method == Method::daimc) {
      model::Hyperparams hp = cfg.fit;
      hp.alpha = alpha;
      hp.beta = beta;
      hp.k = k;
      hp.seed = seed;
      model::FactorizationState st = staged("fit", [&] { return model::fit(masked, hp); });
      rec.objective = st.objective_trace.back();
      rec.iterations = st.iterations;
      rec.trace = st.objective_trace;
      score(out, masked, st.latent, k, seed, cfg, nullptr);
      out.daimc_state = std::move(st);
    } else {
      seminmf::Options opts;
      opts.tol = cfg.fit.outer_tol;
      opts.max_iter = cfg.fit.outer_max;
      opts.epsilon = cfg.fit.epsilon;
      Matrix x;
      std::vector<Index> kept;
      if (method == Method::seminmf_fill) {
        x = fill_and_concatenate(masked);
      } else {
        std::tie(x, kept) = concatenate_complete(masked);
        if (static_cast<Index>(kept.size()) < k + 1) {
          std::ostringstream os;
          os << "only " << kept.size() << " instances are present in every view";
          throw StageError("seminmf", os.str());
        }
      }
      seminmf::State st = staged("seminmf", [&] { return seminmf::fit(x, k, seed, opts); });
      rec.objective = st.objective;
      rec.iterations = st.iterations;
      rec.trace = st.trace;
      const Matrix latent = column_normalized(st.v);
      score(out, masked, latent, k, seed, cfg, method == Method::seminmf_concat ? &kept : nullptr);
      out.latent = latent;
      out.basis = st.u;
    }
    rec.ok = true;
  } catch (const StageError& e) {
    rec.ok = false;
    rec.stage = e.stage();
    rec.error = e.what();
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

// ---------------------------------------------------------------------------
// Sweep

namespace {

auto tuple_key(const CellRecord& r) {
  return std::make_tuple(static_cast<int>(r.method), r.n_views, r.rate, r.alpha, r.beta, r.seed);
}

std::vector<Index> resolve_view_counts(const ExperimentConfig& cfg, Index available) {
  if (cfg.view_counts.empty()) return {available};
  for (Index n : cfg.view_counts) {
    if (n > available) {
      std::ostringstream os;
      os << "view count " << n << " exceeds the " << available << " available views";
      throw StageError("config", os.str());
    }
  }
  return cfg.view_counts;
}

MultiViewDataset first_views(const MultiViewDataset& ds, Index n) {
  if (n == ds.n_views()) return ds;
  std::vector<Index> keep(static_cast<std::size_t>(n));
  for (Index v = 0; v < n; ++v) keep[static_cast<std::size_t>(v)] = v;
  return ds.subset_views(keep);
}

}  // namespace

std::vector<Aggregate> aggregate(const std::vector<CellRecord>& records) {
  std::map<std::tuple<int, Index, double, double, double>, std::vector<const CellRecord*>> groups;
  for (const CellRecord& r : records) {
    auto key = std::make_tuple(static_cast<int>(r.method), r.n_views, r.rate, r.alpha, r.beta);
    auto& g = groups[key];
    if (r.ok && r.has_metrics) g.push_back(&r);
  }
  std::vector<Aggregate> out;
  for (const auto& [key, members] : groups) {
    Aggregate a;
    a.method = static_cast<Method>(std::get<0>(key));
    a.n_views = std::get<1>(key);
    a.rate = std::get<2>(key);
    a.alpha = std::get<3>(key);
    a.beta = std::get<4>(key);
    a.count = static_cast<int>(members.size());
    if (a.count == 0) {
      a.nmi_mean = a.nmi_std = a.ac_mean = a.ac_std = std::nan("");
      out.push_back(a);
      continue;
    }
    double sn = 0.0, sa = 0.0;
    for (const CellRecord* r : members) {
      sn += r->nmi;
      sa += r->ac;
    }
    a.nmi_mean = sn / a.count;
    a.ac_mean = sa / a.count;
    double vn = 0.0, va = 0.0;
    for (const CellRecord* r : members) {
      vn += (r->nmi - a.nmi_mean) * (r->nmi - a.nmi_mean);
      va += (r->ac - a.ac_mean) * (r->ac - a.ac_mean);
    }
    a.nmi_std = a.count > 1 ? std::sqrt(vn / (a.count - 1)) : 0.0;
    a.ac_std = a.count > 1 ? std::sqrt(va / (a.count - 1)) : 0.0;
    out.push_back(a);
  }
  return out;
}

RunReport sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  RunReport report;
  std::optional<MultiViewDataset> loaded;
  std::vector<Index> view_counts;
  try {
    loaded = load_source(cfg.data);
    view_counts = resolve_view_counts(cfg, loaded->n_views());
  } catch (const StageError& e) {
    report.failed_stage = e.stage();
    report.error = e.what();
    return report;
  }
  const MultiViewDataset& ds = *loaded;

  // One mask per (rate, seed), generated on the full view set.
  struct Masked {
    double rate;
    std::uint64_t seed;
    std::optional<MultiViewDataset> ds;
    std::string error;
  };
  std::vector<Masked> masks;
  for (double rate : cfg.rates) {
    for (std::uint64_t seed : cfg.seeds) {
      Masked m{rate, seed, std::nullopt, {}};
      try {
        m.ds = data::apply_incomplete_rate(ds, rate, seed);
      } catch (const std::exception& e) {
        m.error = e.what();
      }
      masks.push_back(std::move(m));
    }
  }

  // Baselines ignore alpha and beta, so they run once per mask and view count
  // and are copied into every (alpha, beta) cell.
  struct Job {
    Method method;
    Index n_views;
    std::size_t mask;
    double alpha;
    double beta;
  };
  std::vector<Job> jobs;
  for (Method method : cfg.methods) {
    for (Index nv : view_counts) {
      for (std::size_t mi = 0; mi < masks.size(); ++mi) {
        if (method == Method::daimc) {
          for (double a : cfg.alphas)
            for (double b : cfg.betas) jobs.push_back({method, nv, mi, a, b});
        } else {
          jobs.push_back({method, nv, mi, 0.0, 0.0});
        }
      }
    }
  }

  std::vector<CellRecord> results(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      const Masked& m = masks[job.mask];
      CellRecord rec;
      if (!m.ds) {
        rec.method = job.method;
        rec.n_views = job.n_views;
        rec.seed = m.seed;
        rec.stage = "mask";
        rec.error = m.error;
      } else {
        try {
          const MultiViewDataset sub = first_views(*m.ds, job.n_views);
          rec = run_cell(sub, job.method, job.alpha, job.beta, m.seed, cfg).record;
        } catch (const std::exception& e) {
          rec.method = job.method;
          rec.seed = m.seed;
          rec.stage = "mask";
          rec.error = e.what();
        }
      }
      rec.n_views = job.n_views;
      rec.rate = m.rate;
      results[i] = std::move(rec);
    }
  };
  const int n_threads = std::max(1, std::min<int>(cfg.workers, static_cast<int>(jobs.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const Job& job = jobs[i];
    if (job.method == Method::daimc) {
      report.records.push_back(results[i]);
      continue;
    }
    for (double a : cfg.alphas) {
      for (double b : cfg.betas) {
        CellRecord rec = results[i];
        rec.alpha = a;
        rec.beta = b;
        report.records.push_back(std::move(rec));
      }
    }
  }
  std::sort(report.records.begin(), report.records.end(),
            [](const CellRecord& a, const CellRecord& b) { return tuple_key(a) < tuple_key(b); });
  report.aggregates = aggregate(report.records);
  return report;
}

// ---------------------------------------------------------------------------
// Output

std::string report_csv(const RunReport& report) {
  std::ostringstream os;
  os << "kind,method,n_views,rate,alpha,beta,seed,metric,value\n";
  auto row = [&](const char* kind, Method m, Index nv, double rate, double a, double b,
                 const std::string& seed, const char* metric, const std::string& value) {
    os << kind << ',' << to_string(m) << ',' << nv << ',' << format_double(rate) << ','
       << format_double(a) << ',' << format_double(b) << ',' << seed << ',' << metric << ','
       << value << '\n';
  };
  for (const CellRecord& r : report.records) {
    const std::string seed = std::to_string(r.seed);
    if (!r.ok) {
      row("cell", r.method, r.n_views, r.rate, r.alpha, r.beta, seed, "failed_stage", r.stage);
      continue;
    }
    if (r.has_metrics) {
      row("cell", r.method, r.n_views, r.rate, r.alpha, r.beta, seed, "nmi", format_double(r.nmi));
      row("cell", r.method, r.n_views, r.rate, r.alpha, r.beta, seed, "ac", format_double(r.ac));
    }
    row("cell", r.method, r.n_views, r.rate, r.alpha, r.beta, seed, "objective",
        format_double(r.objective));
    row("cell", r.method, r.n_views, r.rate, r.alpha, r.beta, seed, "iterations",
        std::to_string(r.iterations));
    row("cell", r.method, r.n_views, r.rate, r.alpha, r.beta, seed, "n_evaluated",
        std::to_string(r.n_evaluated));
  }
  for (const Aggregate& a : report.aggregates) {
    row("aggregate", a.method, a.n_views, a.rate, a.alpha, a.beta, "", "count",
        std::to_string(a.count));
    row("aggregate", a.method, a.n_views, a.rate, a.alpha, a.beta, "", "nmi_mean", format_double(a.nmi_mean));
    row("aggregate", a.method, a.n_views, a.rate, a.alpha, a.beta, "", "nmi_std", format_double(a.nmi_std));
    row("aggregate", a.method, a.n_views, a.rate, a.alpha, a.beta, "", "ac_mean", format_double(a.ac_mean));
    row("aggregate", a.method, a.n_views, a.rate, a.alpha, a.beta, "", "ac_std", format_double(a.ac_std));
  }
  return os.str();
}

namespace {

json nullable(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

}  // namespace

json report_json(const RunReport& report, const ExperimentConfig& cfg) {
  json j;
  j["status"] = report.failed_stage ? "error" : "ok";
  if (report.failed_stage) {
    j["stage"] = *report.failed_stage;
    j["error"] = report.error.value_or("");
  }
  j["config"] = to_json(cfg);
  j["records"] = json::array();
  for (const CellRecord& r : report.records) {
    json c = {{"method", to_string(r.method)}, {"n_views", r.n_views}, {"rate", r.rate},
              {"alpha", r.alpha},              {"beta", r.beta},       {"seed", r.seed},
              {"ok", r.ok}};
    if (r.ok) {
      c["nmi"] = r.has_metrics ? nullable(r.nmi) : json(nullptr);
      c["ac"] = r.has_metrics ? nullable(r.ac) : json(nullptr);
      c["objective"] = nullable(r.objective);
      c["iterations"] = r.iterations;
      c["n_evaluated"] = r.n_evaluated;
      c["trace"] = r.trace;
    } else {
      c["stage"] = r.stage;
      c["error"] = r.error;
    }
    c["wall_seconds"] = r.wall_seconds;
    j["records"].push_back(std::move(c));
  }
  j["aggregates"] = json::array();
  for (const Aggregate& a : report.aggregates) {
    j["aggregates"].push_back({{"method", to_string(a.method)},
                               {"n_views", a.n_views},
                               {"rate", a.rate},
                               {"alpha", a.alpha},
                               {"beta", a.beta},
                               {"count", a.count},
                               {"nmi_mean", nullable(a.nmi_mean)},
                               {"nmi_std", nullable(a.nmi_std)},
                               {"ac_mean", nullable(a.ac_mean)},
                               {"ac_std", nullable(a.ac_std)}});
  }
  return j;
}

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot write " + path.string());
  f << text;
  if (!f) throw IoError("write failed for " + path.string());
}

}  // namespace

void write_report(const RunReport& report, const ExperimentConfig& cfg, const fs::path& dir) {
  ensure_dir(dir);
  write_text(dir / "report.csv", report_csv(report));
  write_text(dir / "report.json", report_json(report, cfg).dump(2) + "\n");
}

void write_factors(const model::FactorizationState& st, const model::Hyperparams& hp,
                   const fs::path& dir) {
  ensure_dir(dir);
  json side;
  side["hyperparams"] = {{"alpha", hp.alpha},         {"beta", hp.beta},
                         {"k", hp.k},                 {"outer_tol", hp.outer_tol},
                         {"inner_tol", hp.inner_tol}, {"outer_max", hp.outer_max},
                         {"inner_max", hp.inner_max}, {"epsilon", hp.epsilon},
                         {"seed", hp.seed}};
  side["iterations"] = st.iterations;
  side["converged"] = st.converged;
  side["objective_trace"] = st.objective_trace;
  side["pre_normalization_trace"] = st.pre_normalization_trace;
  side["matrices"] = json::array();
  auto put = [&](const Matrix& m, const std::string& name, const std::string& role, int view) {
    const std::string file = name + ".csv";
    data::write_matrix_csv(m, dir / file);
    json e = {{"name", name}, {"role", role}, {"path", file}, {"rows", m.rows()}, {"cols", m.cols()}};
    if (view >= 0) e["view"] = view;
    side["matrices"].push_back(std::move(e));
  };
  put(st.latent, "V", "latent", -1);
  for (std::size_t i = 0; i < st.basis.size(); ++i) {
    put(st.basis[i], "U_" + std::to_string(i), "basis", static_cast<int>(i));
    put(st.regression[i], "B_" + std::to_string(i), "regression", static_cast<int>(i));
  }
  write_text(dir / "factors.json", side.dump(2) + "\n");
}

RunReport run_single(const ExperimentConfig& cfg, const fs::path& out) {
  RunReport report;
  auto fail = [&](const std::string& stage, const std::string& msg) {
    report.failed_stage = stage;
    report.error = msg;
    write_report(report, cfg, out);
    return report;
  };
  try {
    validate(cfg);
  } catch (const std::exception& e) {
    return fail("config", e.what());
  }
  if (cfg.rates.size() != 1 || cfg.alphas.size() != 1 || cfg.betas.size() != 1 ||
      cfg.seeds.size() != 1 || cfg.methods.size() != 1 || cfg.view_counts.size() > 1)
    return fail("config", "run takes exactly one rate, alpha, beta, seed and method");

  std::optional<MultiViewDataset> ds;
  try {
    ds = load_source(cfg.data);
  } catch (const StageError& e) {
    return fail(e.stage(), e.what());
  }
  MultiViewDataset masked = *ds;
  try {
    masked = data::apply_incomplete_rate(*ds, cfg.rates[0], cfg.seeds[0]);
    if (!cfg.view_counts.empty()) {
      const Index n = cfg.view_counts[0];
      if (n > masked.n_views()) throw InvalidInput("view count exceeds available views");
      std::vector<Index> keep;
      for (Index v = 0; v < n; ++v) keep.push_back(v);
      masked = masked.subset_views(keep);
    }
  } catch (const std::exception& e) {
    return fail("mask", e.what());
  }

  CellOutput cell = run_cell(masked, cfg.methods[0], cfg.alphas[0], cfg.betas[0], cfg.seeds[0], cfg);
  cell.record.rate = cfg.rates[0];
  report.records.push_back(cell.record);
  report.aggregates = aggregate(report.records);
  if (!cell.record.ok) {
    report.failed_stage = cell.record.stage;
    report.error = cell.record.error;
  }
  write_report(report, cfg, out);

  const fs::path factors = out / "factors";
  if (cell.daimc_state) {
    model::Hyperparams hp = cfg.fit;
    hp.alpha = cfg.alphas[0];
    hp.beta = cfg.betas[0];
    hp.k = cell.daimc_state->latent.cols();
    hp.seed = cfg.seeds[0];
    write_factors(*cell.daimc_state, hp, factors);
  } else if (cell.latent) {
    ensure_dir(factors);
    data::write_matrix_csv(*cell.latent, factors / "V.csv");
    data::write_matrix_csv(*cell.basis, factors / "U.csv");
    json side = {{"method", to_string(cfg.methods[0])},
                 {"trace", cell.record.trace},
                 {"matrices",
                  {{{"name", "V"}, {"path", "V.csv"}, {"rows", cell.latent->rows()}, {"cols", cell.latent->cols()}},
                   {{"name", "U"}, {"path", "U.csv"}, {"rows", cell.basis->rows()}, {"cols", cell.basis->cols()}}}}};
    write_text(factors / "factors.json", side.dump(2) + "\n");
  }
  if (!cell.assignments.empty()) {
    std::string text;
    for (int a : cell.assignments) text += std::to_string(a) + "\n";
    write_text(out / "assignments.csv", text);
  }
  return report;
}

fs::path synth_to_disk(const data::SynthSpec& spec, const fs::path& out) {
  return data::save_manifest(data::synth_planted(spec), out);
}

}  // namespace daimc::harness
