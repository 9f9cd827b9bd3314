#include "seqmeas/io.hpp"

#include <cstdio>
#include <iomanip>
#include <sstream>

#include "seqmeas/errors.hpp"

namespace seqmeas {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json matrix_to_json(const CMatrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("only square matrices are serialized");
  json re = json::array();
  json im = json::array();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    json rr = json::array();
    json ri = json::array();
    for (Eigen::Index c = 0; c < a.cols(); ++c) {
      rr.push_back(a(r, c).real());
      ri.push_back(a(r, c).imag());
    }
    re.push_back(std::move(rr));
    im.push_back(std::move(ri));
  }
  return {{"dim", a.rows()}, {"re", re}, {"im", im}};
}

CMatrix matrix_from_json(const json& j) {
  if (!j.is_object() || !j.contains("re")) throw ValidationError("matrix needs a \"re\" field");
  const auto& re = j.at("re");
  const auto n = static_cast<Eigen::Index>(re.size());
  if (j.contains("dim") && j.at("dim").get<Eigen::Index>() != n) {
    throw ShapeError("matrix \"dim\" does not match the number of rows");
  }
  CMatrix a = CMatrix::Zero(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = re.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != n) throw ShapeError("matrix is not square");
    for (Eigen::Index c = 0; c < n; ++c) a(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  if (j.contains("im")) {
    const auto& im = j.at("im");
    if (static_cast<Eigen::Index>(im.size()) != n) throw ShapeError("\"im\" shape differs from \"re\"");
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto& row = im.at(static_cast<std::size_t>(r));
      if (static_cast<Eigen::Index>(row.size()) != n) throw ShapeError("\"im\" shape differs from \"re\"");
      for (Eigen::Index c = 0; c < n; ++c) {
        a(r, c) += cplx(0.0, row.at(static_cast<std::size_t>(c)).get<double>());
      }
    }
  }
  return a;
}

json joint_model_to_json(const JointModel& m) {
  json table = json::array();
  for (Eigen::Index r = 0; r < m.table().rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.table().cols(); ++c) row.push_back(m.table()(r, c));
    table.push_back(std::move(row));
  }
  return {{"p_table", table},
          {"d", m.d()},
          {"D", m.D()},
          {"labels_i", m.labels_i()},
          {"labels_j", m.labels_j()},
          {"mode", m.mode() == Normalization::exact ? "exact" : "truncated"},
          {"mass_deficit", m.mass_deficit()}};
}

JointModel joint_model_from_json(const json& j) {
  const auto& t = j.at("p_table");
  const auto rows = static_cast<Eigen::Index>(t.size());
  if (rows == 0) throw ShapeError("empty joint table");
  const auto cols = static_cast<Eigen::Index>(t.at(0).size());
  RMatrix table(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const auto& row = t.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw ShapeError("ragged joint table");
    for (Eigen::Index c = 0; c < cols; ++c) table(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  std::vector<int> d(static_cast<std::size_t>(rows), 1);
  std::vector<int> dd(static_cast<std::size_t>(cols), 1);
  if (j.contains("d")) d = j.at("d").get<std::vector<int>>();
  if (j.contains("D")) dd = j.at("D").get<std::vector<int>>();
  std::vector<std::string> li, lj;
  if (j.contains("labels_i")) li = j.at("labels_i").get<std::vector<std::string>>();
  if (j.contains("labels_j")) lj = j.at("labels_j").get<std::vector<std::string>>();
  Normalization mode = Normalization::exact;
  if (j.contains("mode")) {
    const auto s = j.at("mode").get<std::string>();
    if (s == "truncated") {
      mode = Normalization::truncated;
    } else if (s != "exact") {
      throw ValidationError("mode must be \"exact\" or \"truncated\"");
    }
  }
  return JointModel(std::move(table), std::move(d), std::move(dd), std::move(li), std::move(lj),
                    mode);
}

void write_family_csv(std::ostream& os, const SpectralFamily& fam) {
  const std::size_t l = fam.tuple(0).size();
  os << "index";
  for (std::size_t k = 1; k <= l; ++k) os << ",E_" << k;
  os << ",d\n";
  for (std::size_t i = 0; i < fam.size(); ++i) {
    os << i;
    for (double e : fam.tuple(i)) os << ',' << format_double(e);
    os << ',' << fam.degeneracies()[i] << '\n';
  }
}

void write_work_csv(std::ostream& os, const WorkDistribution& wd) {
  os << "w,prob,reciprocal_prob,ratio_error\n";
  for (const auto& l : wd.levels()) {
    os << format_double(l.w) << ',' << format_double(l.prob) << ','
       << format_double(l.reciprocal_prob) << ',' << format_double(l.ratio_error) << '\n';
  }
}

void write_entropy_curve_csv(std::ostream& os, const std::vector<EntropyCurveRow>& rows) {
  os << "t,S_p,S_phat,mass_deficit_p,mass_deficit_phat,N_x,N_p\n";
  for (const auto& r : rows) {
    os << format_double(r.t) << ',' << format_double(r.s_p) << ',' << format_double(r.s_phat)
       << ',' << format_double(r.mass_deficit_p) << ',' << format_double(r.mass_deficit_phat)
       << ',' << r.n_x << ',' << r.n_p << '\n';
  }
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const json& config) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(config.dump());
  return os.str();
}

}  // namespace seqmeas
