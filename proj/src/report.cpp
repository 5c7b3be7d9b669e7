#include "nsfde/report.hpp"

#include <iomanip>
#include <sstream>

namespace nsfde::solver {

namespace {

void format_rows(std::ostringstream& out, const std::vector<bihari::CheckRow>& rows) {
  for (const auto& row : rows) {
    out << "  " << std::left << std::setw(58) << row.name << " lhs=" << std::setw(13)
        << std::setprecision(6) << row.lhs << " rhs=" << std::setw(13) << row.rhs
        << " margin=" << std::setw(13) << row.margin << (row.pass ? " PASS" : " FAIL");
    if (!row.note.empty()) out << "  # " << row.note;
    out << "\n";
  }
}

}  // namespace

std::string format_hypothesis_table(const DiagnosticsReport& report) {
  std::ostringstream out;
  out << "hypotheses (H.1)-(H.4): " << (report.hypotheses_pass ? "PASS" : "FAIL") << "\n";
  format_rows(out, report.hypothesis_rows);
  if (!report.hypotheses_pass)
    out << "first violated: " << report.first_violated << "\n";
  return out.str();
}

std::string format_report(const Scenario& s, const DiagnosticsReport& report) {
  std::ostringstream out;
  out << std::setprecision(10);
  out << "== certification report ==\n";
  out << format_hypothesis_table(report);
  out << "\n== contraction ==\n";
  out << "  window length T1 = " << report.t1 << " (" << report.n_windows
      << " window(s)), gamma(T1) = " << report.gamma_t1 << "\n";
  out << "  inner solve " << (report.inner_triangular ? "triangular (one pass exact)" : "iterative")
      << ", measured rate = " << report.measured_inner_rate << "\n";
  out << "\n== picard ==\n";
  out << "  iterations = " << report.iterations << ", converged = "
      << (report.converged ? "yes" : "no") << ", final sup E||dx||^2 = " << report.final_d
      << " (tol " << s.picard_tol << ")\n";
  out << "\n== measured constants ==\n";
  out << "  D0_hat = " << report.d0_hat << "\n";
  out << "  M1_hat = " << report.m1_hat << "\n";
  out << "  M2_hat = " << report.m2_hat << "\n";
  out << "  u0 = " << report.u0 << "\n";
  out << "\n== certifications ==\n";
  format_rows(out, report.certification_rows);
  out << "\noverall: " << (report.all_pass() ? "PASS" : "FAIL") << "\n";
  return out.str();
}

}  // namespace nsfde::solver
