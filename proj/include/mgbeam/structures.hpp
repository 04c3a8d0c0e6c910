#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "mgbeam/model.hpp"

namespace mgbeam {

enum class StructureKind { Full, RS, MRT, ZF, RZF, MZF, MRZF };

inline constexpr std::array<StructureKind, 7> kAllStructures = {
    StructureKind::Full, StructureKind::RS,  StructureKind::MRT, StructureKind::ZF,
    StructureKind::RZF,  StructureKind::MZF, StructureKind::MRZF};

inline std::string to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::Full: return "full";
    case StructureKind::RS: return "rs";
    case StructureKind::MRT: return "mrt";
    case StructureKind::ZF: return "zf";
    case StructureKind::RZF: return "rzf";
    case StructureKind::MZF: return "mzf";
    case StructureKind::MRZF: return "mrzf";
  }
  return "?";
}

inline StructureKind parse_structure_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (StructureKind kind : kAllStructures) {
    if (to_string(kind) == lower) return kind;
  }
  throw DimensionError("unknown structure '" + std::string(text) +
                       "' (expected full|rs|mrt|zf|rzf|mzf|mrzf)");
}

/**
 * Per-group bases T_g (w_g = T_g c_g) together with the reduced problem
 * data every solver iteration needs:
 *
 *   eff_channels[i] = T_i^H H   (m_i x K, column u is f^(i)_u)
 *   power_grams[i]  = T_i^H T_i (m_i x m_i)
 *
 * For Full and RS all groups share one basis and `shared` is set, so a single
 * factorization serves every group.
 */
struct StructureBasis {
  StructureKind kind = StructureKind::Full;
  std::vector<CMatrix> bases;
  std::vector<int> dims;
  std::vector<CMatrix> eff_channels;
  std::vector<CMatrix> power_grams;
  bool shared = false;

  int num_groups() const { return static_cast<int>(bases.size()); }
};

namespace detail {

inline void check_full_column_rank(const CMatrix& H, const char* what) {
  if (H.rows() < H.cols()) {
    throw SingularityError(std::string(what) + " requires L >= K");
  }
  Eigen::BDCSVD<CMatrix> svd(H);
  const RVector& sv = svd.singularValues();
  if (sv.size() == 0 || sv(sv.size() - 1) <= kPinvRelativeTolerance * sv(0)) {
    throw SingularityError(std::string(what) + " requires full column rank channels");
  }
}

inline void finish_basis(const Scenario& s, StructureBasis& b) {
  b.dims.clear();
  b.eff_channels.clear();
  b.power_grams.clear();
  if (b.shared) {
    const CMatrix eff = b.bases.front().adjoint() * s.H;
    const CMatrix gram = linalg::hermitian_part(b.bases.front().adjoint() * b.bases.front());
    for (int g = 0; g < s.G; ++g) {
      b.dims.push_back(static_cast<int>(b.bases[g].cols()));
      b.eff_channels.push_back(eff);
      b.power_grams.push_back(gram);
    }
    return;
  }
  for (const CMatrix& t : b.bases) {
    b.dims.push_back(static_cast<int>(t.cols()));
    b.eff_channels.push_back(t.adjoint() * s.H);
    b.power_grams.push_back(linalg::hermitian_part(t.adjoint() * t));
  }
}

}  // namespace detail

inline StructureBasis build_basis(const Scenario& s, StructureKind kind) {
  s.validate();
  StructureBasis b;
  b.kind = kind;
  const int K = s.num_users();
  switch (kind) {
    case StructureKind::Full: {
      b.shared = true;
      b.bases.assign(s.G, CMatrix::Identity(s.L, s.L));
      break;
    }
    case StructureKind::RS: {
      b.shared = true;
      // Rank-deficient channels (e.g. L < K) use an orthonormal basis of col(H).
      const bool full_rank = linalg::range_basis(s.H).cols() == K;
      b.bases.assign(s.G, full_rank ? s.H : linalg::range_basis(s.H));
      break;
    }
    case StructureKind::MRT: {
      for (int g = 0; g < s.G; ++g) b.bases.push_back(s.group_channels(g));
      break;
    }
    case StructureKind::ZF:
    case StructureKind::RZF: {
      detail::check_full_column_rank(s.H, "zero forcing");
      CMatrix gram = linalg::hermitian_part(s.H.adjoint() * s.H);
      if (kind == StructureKind::RZF) gram.diagonal().array() += 1.0 / s.P_t;
      const CMatrix all = s.H * linalg::hpd_solve_with_ridge(gram, CMatrix::Identity(K, K));
      for (int g = 0; g < s.G; ++g) {
        b.bases.push_back(all.middleCols(s.group_offset(g), s.group_sizes[g]));
      }
      break;
    }
    case StructureKind::MZF: {
      for (int g = 0; g < s.G; ++g) {
        if (s.L <= K - s.group_sizes[g]) {
          throw InfeasibleStructureError("multicast zero forcing needs L > K - K_g");
        }
        // Null space of the other groups' channels, reached through the
        // high-power limit of the regularized inverse.
        b.bases.push_back(linalg::project_out(s.complement_channels(g), s.group_channels(g)));
      }
      break;
    }
    case StructureKind::MRZF: {
      for (int g = 0; g < s.G; ++g) {
        const CMatrix hc = s.complement_channels(g);
        CMatrix a = linalg::hermitian_part(hc * hc.adjoint());
        a.diagonal().array() += 1.0 / s.P_t;
        b.bases.push_back(linalg::hpd_solve_with_ridge(a, s.group_channels(g)));
      }
      break;
    }
  }
  detail::finish_basis(s, b);
  return b;
}

inline void check_coefficients(const StructureBasis& b, const Coefficients& c) {
  if (static_cast<int>(c.size()) != b.num_groups()) {
    throw DimensionError("one coefficient vector per group expected");
  }
  for (int g = 0; g < b.num_groups(); ++g) {
    if (c[g].size() != b.dims[g]) throw DimensionError("coefficient size mismatch");
  }
}

inline Beamformer expand(const StructureBasis& b, const Coefficients& coeffs) {
  check_coefficients(b, coeffs);
  Beamformer bf;
  bf.coeffs = coeffs;
  bf.W.resize(b.bases.front().rows(), b.num_groups());
  for (int g = 0; g < b.num_groups(); ++g) bf.W.col(g) = b.bases[g] * coeffs[g];
  return bf;
}

/// Sum_g c_g^H Q_g c_g, the transmit power of the expanded beamformer.
inline double reduced_power(const StructureBasis& b, const Coefficients& coeffs) {
  check_coefficients(b, coeffs);
  double p = 0.0;
  for (int g = 0; g < b.num_groups(); ++g) {
    p += coeffs[g].dot(b.power_grams[g] * coeffs[g]).real();
  }
  return std::max(p, 0.0);
}

/// Link gains computed in the reduced space; cost is independent of L.
inline LinkGains reduced_link_gains(const StructureBasis& b, const Coefficients& coeffs) {
  check_coefficients(b, coeffs);
  const Eigen::Index K = b.eff_channels.front().cols();
  LinkGains out;
  out.cross.resize(K, b.num_groups());
  for (int g = 0; g < b.num_groups(); ++g) {
    out.cross.col(g) = b.eff_channels[g].adjoint() * coeffs[g];
  }
  out.power = reduced_power(b, coeffs);
  return out;
}

/// Least-squares fit of the MRT sum direction sum_k h_gk in each group basis.
inline Coefficients initial_coefficients(const Scenario& s, const StructureBasis& b) {
  Coefficients out;
  for (int g = 0; g < s.G; ++g) {
    const CVector target = s.group_channels(g).rowwise().sum();
    if (b.kind == StructureKind::Full) {
      out.push_back(target);
    } else {
      out.push_back(b.bases[g].completeOrthogonalDecomposition().solve(target));
    }
  }
  return out;
}

}  // namespace mgbeam
