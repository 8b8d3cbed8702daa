#include "dyst/evaluation/report.hpp"

#include <iomanip>
#include <sstream>

namespace dyst::eval {

std::string format_report(std::span<const MetricReport> reports) {
  std::ostringstream os;
  os << std::setprecision(6) << std::fixed;
  for (const auto& r : reports) {
    const std::string p = r.label + ".";
    os << p << "n_scenes = " << r.n_scenes << "\n";
    for (int i = 0; i < kRecombinationCount; ++i) {
      const auto pattern = static_cast<Recombination>(i);
      os << p << "psnr." << to_string(pattern) << " = " << r.recombination[pattern] << "\n";
    }
    os << p << "R_cam = " << r.camera.ratio << "\n";
    os << p << "R_cam.guarded = " << r.camera.guarded << "/" << r.camera.samples << "\n";
    os << p << "R_dyn = " << r.dynamics.ratio << "\n";
    os << p << "R_dyn.guarded = " << r.dynamics.guarded << "/" << r.dynamics.samples << "\n";
    os << p << "lpips = unavailable\n";
  }
  if (reports.size() > 1) {
    os << "#\n# " << std::left << std::setw(20) << "model" << std::right << std::setw(10) << "PSNR" << std::setw(10)
       << "R_cam" << std::setw(10) << "R_dyn" << std::setw(12) << "LPIPS" << "\n";
    for (const auto& r : reports) {
      os << "# " << std::left << std::setw(20) << r.label << std::right << std::setprecision(2) << std::setw(10)
         << r.recombination[Recombination::matching_matching] << std::setprecision(3) << std::setw(10)
         << r.camera.ratio << std::setw(10) << r.dynamics.ratio << std::setw(12) << "unavailable" << "\n";
    }
  }
  return os.str();
}

std::string matrix_csv(const Eigen::MatrixXd& m) {
  std::ostringstream os;
  os << std::setprecision(9);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
    os << "\n";
  }
  return os.str();
}

}  // namespace dyst::eval
