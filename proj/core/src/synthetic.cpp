#include "metalearn/synthetic.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "metalearn/error.hpp"
#include "metalearn/random.hpp"

namespace metalearn {

namespace {

double round4(double v) { return std::round(v * 1e4) / 1e4; }

Column numeric(std::string name, std::vector<double> values) {
  Column c;
  c.name = std::move(name);
  c.type = ColumnType::kNumeric;
  c.missing.assign(values.size(), 0);
  for (auto& v : values) {
    if (std::isnan(v)) {
      c.missing[&v - values.data()] = 1;
    } else {
      v = round4(v);
    }
  }
  c.values = std::move(values);
  return c;
}

Column categorical(std::string name, std::vector<double> codes, std::vector<std::string> levels) {
  Column c;
  c.name = std::move(name);
  c.type = levels.size() == 2 ? ColumnType::kBinary : ColumnType::kCategorical;
  c.missing.assign(codes.size(), 0);
  c.values = std::move(codes);
  c.levels = std::move(levels);
  return c;
}

std::vector<std::string> class_names(int c) {
  std::vector<std::string> out;
  for (int i = 0; i < c; ++i) out.push_back("c" + std::to_string(i));
  return out;
}

struct Builder {
  Builder(std::size_t rows, std::uint64_t seed) : n(rows), rng(seed) {}

  std::size_t n;
  Rng rng;
  std::normal_distribution<double> gauss{0.0, 1.0};
  std::vector<Column> cols;

  double g() { return gauss(rng); }
  double u() { return uniform01(rng); }

  void add_noise(std::size_t count) {
    for (std::size_t j = 0; j < count; ++j) {
      std::vector<double> v(n);
      for (auto& x : v) x = g();
      cols.push_back(numeric("noise" + std::to_string(j), std::move(v)));
    }
  }
  void add(const std::string& name, const std::vector<double>& v) { cols.push_back(numeric(name, v)); }
  void flip(std::vector<int>& y, int c, double rate) {
    for (auto& label : y) {
      if (u() < rate) label = (label + 1 + static_cast<int>(u() * (c - 1))) % c;
    }
  }
  Dataset done(std::string id, std::vector<int> y, int c) {
    return Dataset(id, id, std::move(cols), std::move(y), class_names(c));
  }
};

Dataset linear_blobs(const std::string& id, std::size_t n, std::uint64_t seed, double sep) {
  Builder b(n, seed);
  std::vector<double> x1(n), x2(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    const double s = y[i] ? sep : -sep;
    x1[i] = s + b.g();
    x2[i] = 0.5 * s + b.g();
  }
  b.add("x1", x1);
  b.add("x2", x2);
  b.add_noise(4);
  return b.done(id, y, 2);
}

Dataset xor_task(const std::string& id, std::size_t n, std::uint64_t seed, double noise) {
  Builder b(n, seed);
  std::vector<double> x1(n), x2(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = 2.0 * b.u() - 1.0;
    x2[i] = 2.0 * b.u() - 1.0;
    y[i] = (x1[i] > 0) != (x2[i] > 0);
  }
  b.flip(y, 2, noise);
  b.add("x1", x1);
  b.add("x2", x2);
  b.add_noise(3);
  return b.done(id, y, 2);
}

Dataset circles(const std::string& id, std::size_t n, std::uint64_t seed, double noise) {
  Builder b(n, seed);
  std::vector<double> x1(n), x2(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    const double r = (y[i] ? 1.0 : 0.45) + noise * b.g();
    const double t = 2.0 * std::numbers::pi * b.u();
    x1[i] = r * std::cos(t);
    x2[i] = r * std::sin(t);
  }
  b.add("x1", x1);
  b.add("x2", x2);
  b.add_noise(2);
  return b.done(id, y, 2);
}

Dataset multiclass_blobs(const std::string& id, std::size_t n, std::uint64_t seed, double spread) {
  Builder b(n, seed);
  const double cx[] = {-2, 2, -2, 2};
  const double cy[] = {-2, -2, 2, 2};
  std::vector<double> x1(n), x2(n), x3(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 4);
    x1[i] = cx[y[i]] + spread * b.g();
    x2[i] = cy[y[i]] + spread * b.g();
    x3[i] = 0.5 * (x1[i] + x2[i]) + b.g();
  }
  b.add("x1", x1);
  b.add("x2", x2);
  b.add("x3", x3);
  b.add_noise(2);
  return b.done(id, y, 4);
}

Dataset imbalanced(const std::string& id, std::size_t n, std::uint64_t seed, double minority) {
  Builder b(n, seed);
  std::vector<double> x1(n), x2(n), x3(n);
  std::vector<int> y(n);
  const auto n_min = static_cast<std::size_t>(std::round(minority * static_cast<double>(n)));
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = i < n_min ? 1 : 0;
    const double s = y[i] ? 1.6 : 0.0;
    x1[i] = s + b.g();
    x2[i] = s * 0.5 + b.g();
    x3[i] = b.g() * (y[i] ? 2.0 : 1.0);
  }
  b.add("x1", x1);
  b.add("x2", x2);
  b.add("x3", x3);
  b.add_noise(2);
  return b.done(id, y, 2);
}

Dataset categorical_rule(const std::string& id, std::size_t n, std::uint64_t seed, double noise) {
  Builder b(n, seed);
  const std::vector<std::string> colours{"red", "green", "blue"};
  const std::vector<std::string> sizes{"s", "m", "l", "xl"};
  std::vector<double> a(n), s(n), f(n), x(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    a[i] = std::floor(b.u() * 3.0);
    s[i] = std::floor(b.u() * 4.0);
    f[i] = b.u() < 0.5 ? 0.0 : 1.0;
    x[i] = b.g();
    const bool rule = (a[i] == 0.0 && s[i] >= 2.0) || (a[i] != 0.0 && f[i] == 1.0);
    y[i] = rule ? 1 : 0;
  }
  b.flip(y, 2, noise);
  b.cols.push_back(categorical("colour", a, colours));
  b.cols.push_back(categorical("size", s, sizes));
  b.cols.push_back(categorical("flag", f, {"no", "yes"}));
  b.add("x", x);
  b.add_noise(1);
  return b.done(id, y, 2);
}

Dataset with_missing(const std::string& id, std::size_t n, std::uint64_t seed, double rate) {
  Builder b(n, seed);
  std::vector<double> x1(n), x2(n), x3(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = b.g();
    x2[i] = b.g();
    x3[i] = b.g();
    y[i] = x1[i] + 0.5 * x2[i] * x2[i] - 0.5 > 0 ? 1 : 0;
  }
  for (auto* v : {&x1, &x2, &x3}) {
    for (auto& cell : *v) {
      if (b.u() < rate) cell = std::nan("");
    }
  }
  b.add("x1", x1);
  b.add("x2", x2);
  b.add("x3", x3);
  b.add_noise(2);
  return b.done(id, y, 2);
}

Dataset label_noise(const std::string& id, std::size_t n, std::uint64_t seed, double noise) {
  Builder b(n, seed);
  std::vector<double> x1(n), x2(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = b.g();
    x2[i] = b.g();
    y[i] = x1[i] - x2[i] > 0 ? 1 : 0;
  }
  b.flip(y, 2, noise);
  b.add("x1", x1);
  b.add("x2", x2);
  b.add_noise(4);
  return b.done(id, y, 2);
}

Dataset sine_boundary(const std::string& id, std::size_t n, std::uint64_t seed, double freq) {
  Builder b(n, seed);
  std::vector<double> x1(n), x2(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    x1[i] = 6.0 * b.u() - 3.0;
    x2[i] = 3.0 * b.u() - 1.5;
    y[i] = x2[i] > std::sin(freq * x1[i]) ? 1 : 0;
  }
  b.add("x1", x1);
  b.add("x2", x2);
  b.add_noise(2);
  return b.done(id, y, 2);
}

Dataset sparse_linear(const std::string& id, std::size_t n, std::uint64_t seed, std::size_t p) {
  Builder b(n, seed);
  std::vector<std::vector<double>> x(p, std::vector<double>(n));
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) x[j][i] = b.g();
    const double s = 1.2 * x[0][i] - 0.8 * x[1][i] + 0.6 * x[2][i] + 0.3 * b.g();
    y[i] = s > 0.8 ? 2 : (s < -0.8 ? 0 : 1);
  }
  for (std::size_t j = 0; j < p; ++j) b.add("v" + std::to_string(j), x[j]);
  return b.done(id, y, 3);
}

}  // namespace

Dataset make_linearly_separable(std::size_t n, std::uint64_t seed, double margin) {
  if (n < 2) throw Error(ErrorCode::kInvalidArgument, "need at least two rows");
  Rng rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix x(n, 2);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int want = static_cast<int>(i % 2);
    for (;;) {
      const double a = g(rng), b = g(rng);
      const double s = 0.8 * a - 0.6 * b;
      if (std::abs(s) < margin || (s > 0) != (want == 1)) continue;
      x(i, 0) = a;
      x(i, 1) = b;
      break;
    }
    y[i] = want;
  }
  return Dataset::from_matrix("linear_separable", x, std::move(y), 2);
}

std::vector<CorpusDataset> desk_corpus(std::uint64_t seed) {
  auto s = [&](std::uint64_t k) { return mix_seed(seed, k); };
  std::vector<CorpusDataset> out;
  auto push = [&](std::string family, Dataset d) { out.push_back({std::move(family), std::move(d)}); };
  for (int v = 0; v < 2; ++v) {
    const auto tag = v == 0 ? std::string("_a") : std::string("_b");
    const auto sv = static_cast<std::uint64_t>(v) * 100;
    const auto n = static_cast<std::size_t>(v == 0 ? 160 : 200);
    push("linear", linear_blobs("linear" + tag, n, s(1 + sv), v == 0 ? 1.0 : 1.2));
    push("xor", xor_task("xor" + tag, n, s(2 + sv), v == 0 ? 0.05 : 0.08));
    push("circles", circles("circles" + tag, n, s(3 + sv), v == 0 ? 0.12 : 0.15));
    push("multiclass", multiclass_blobs("multiclass" + tag, n, s(4 + sv), v == 0 ? 1.2 : 1.4));
    push("imbalanced", imbalanced("imbalanced" + tag, n, s(5 + sv), v == 0 ? 0.15 : 0.2));
    push("categorical", categorical_rule("categorical" + tag, n, s(6 + sv), v == 0 ? 0.05 : 0.08));
    push("missing", with_missing("missing" + tag, n, s(7 + sv), v == 0 ? 0.1 : 0.12));
    push("noisy", label_noise("noisy" + tag, n, s(8 + sv), v == 0 ? 0.2 : 0.25));
    push("sine", sine_boundary("sine" + tag, n, s(9 + sv), v == 0 ? 1.5 : 1.8));
    push("sparse", sparse_linear("sparse" + tag, n, s(10 + sv), v == 0 ? 14 : 18));
  }
  return out;
}

CorpusFiles write_desk_corpus(const std::filesystem::path& dir, std::uint64_t seed) {
  std::filesystem::create_directories(dir);
  CorpusFiles files;
  for (const auto& d : desk_corpus(seed)) {
    const auto file = d.data.id() + ".csv";
    write_dataset(d.data, dir / file, "class");
    ManifestEntry e{d.data.id(), file, "class"};
    files.all.push_back(e);
    if (files.kb.size() < 10) files.kb.push_back(e);
  }
  write_manifest(files.all, dir / "manifest.csv");
  write_manifest(files.kb, dir / "kb_manifest.csv");
  return files;
}

}  // namespace metalearn
