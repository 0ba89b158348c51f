#include "nows/tape.hpp"

#include <cmath>
#include <cstring>
#include <stdexcept>

#include "nows/fem.hpp"

namespace nows::ad {

namespace {
constexpr double kGeluC0 = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluC1 = 0.044715;
}  // namespace

ModeSet make_mode_set(int modes, int dims, int n0, int n1) {
    if (modes < 1) throw std::invalid_argument("make_mode_set: modes >= 1");
    ModeSet ms;
    ms.modes = modes;
    ms.dims = dims;
    ms.n0 = n0;
    ms.n1 = n1;
    if (dims == 1) {
        if (n0 < 2 * modes)
            throw std::invalid_argument("make_mode_set: resolution below mode cutoff");
        for (int k = 0; k < modes; ++k) ms.bins.push_back(k);
    } else {
        if (n0 < 2 * modes || n1 < 2 * modes)
            throw std::invalid_argument("make_mode_set: resolution below mode cutoff");
        const int half = n1 / 2 + 1;
        for (int i = 0; i < 2 * modes - 1; ++i) {
            int ky = i < modes ? i : i - (2 * modes - 1);  // signed frequency
            int row = (ky + n0) % n0;
            for (int kx = 0; kx < modes; ++kx) ms.bins.push_back(row * half + kx);
        }
    }
    return ms;
}

struct Tape::Node {
    enum class Kind {
        leaf,
        affine,
        add_scaled,
        scale_shift,
        mul_mask,
        act,
        rfft,
        irfft,
        gather,
        modemul,
        scatter,
        embed,
        rel_l2,
        vino
    } kind = Kind::leaf;

    std::vector<int64_t> shape;
    bool is_complex = false;
    bool needs_grad = false;
    int64_t n = 0;

    std::vector<double> vr;
    std::vector<cplx> vc;
    const double* pr = nullptr;
    const cplx* pc = nullptr;

    std::vector<double> gr_own;
    std::vector<cplx> gc_own;
    double* gr = nullptr;
    cplx* gc = nullptr;

    int p0 = -1, p1 = -1, p2 = -1;
    int i0 = 0, i1 = 0;
    double d0 = 0.0, d1 = 0.0;
    Activation activation = Activation::identity;
    const ModeSet* modes = nullptr;
    const VinoQuad* quad = nullptr;
    std::span<const double> aux;
    std::vector<double> cache;
};

namespace {
int64_t product(const std::vector<int64_t>& s) {
    int64_t n = 1;
    for (int64_t v : s) n *= v;
    return n;
}
}  // namespace

Tape::Node& Tape::make(std::vector<int64_t> shape, bool is_complex) {
    nodes_.emplace_back();
    Node& nd = nodes_.back();
    nd.shape = std::move(shape);
    nd.is_complex = is_complex;
    nd.n = product(nd.shape);
    if (is_complex) {
        nd.vc.assign(static_cast<size_t>(nd.n), cplx(0.0, 0.0));
        nd.pc = nd.vc.data();
    } else {
        nd.vr.assign(static_cast<size_t>(nd.n), 0.0);
        nd.pr = nd.vr.data();
    }
    return nd;
}

int64_t Tape::numel(NodeId id) const { return nodes_[id].n; }

NodeId Tape::input(std::vector<int64_t> shape, std::span<const double> data) {
    nodes_.emplace_back();
    Node& nd = nodes_.back();
    nd.shape = std::move(shape);
    nd.n = product(nd.shape);
    if (static_cast<int64_t>(data.size()) != nd.n)
        throw std::invalid_argument("Tape::input: size mismatch");
    nd.pr = data.data();
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::param(std::vector<int64_t> shape, std::span<const double> value,
                   std::span<double> grad) {
    nodes_.emplace_back();
    Node& nd = nodes_.back();
    nd.shape = std::move(shape);
    nd.n = product(nd.shape);
    if (static_cast<int64_t>(value.size()) != nd.n ||
        grad.size() != value.size())
        throw std::invalid_argument("Tape::param: size mismatch");
    nd.pr = value.data();
    nd.gr = grad.data();
    nd.needs_grad = true;
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::cparam(std::vector<int64_t> shape, std::span<const cplx> value,
                    std::span<cplx> grad) {
    nodes_.emplace_back();
    Node& nd = nodes_.back();
    nd.shape = std::move(shape);
    nd.is_complex = true;
    nd.n = product(nd.shape);
    if (static_cast<int64_t>(value.size()) != nd.n ||
        grad.size() != value.size())
        throw std::invalid_argument("Tape::cparam: size mismatch");
    nd.pc = value.data();
    nd.gc = grad.data();
    nd.needs_grad = true;
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::affine(NodeId x, NodeId W, NodeId b) {
    const Node& nx = nodes_[x];
    const Node& nw = nodes_[W];
    const Node& nb = nodes_[b];
    if (nx.shape.size() != 2 || nw.shape.size() != 2 || nb.shape.size() != 1)
        throw std::invalid_argument("Tape::affine: rank mismatch");
    const int64_t Ci = nx.shape[0], P = nx.shape[1];
    const int64_t Co = nw.shape[0];
    if (nw.shape[1] != Ci || nb.shape[0] != Co)
        throw std::invalid_argument("Tape::affine: shape mismatch");
    const bool ng = nx.needs_grad || nw.needs_grad || nb.needs_grad;
    Node& y = make({Co, P}, false);
    y.kind = Node::Kind::affine;
    y.p0 = x;
    y.p1 = W;
    y.p2 = b;
    y.needs_grad = ng;
    const double* xp = nodes_[x].pr;
    const double* wp = nodes_[W].pr;
    const double* bp = nodes_[b].pr;
    double* yp = y.vr.data();
    for (int64_t co = 0; co < Co; ++co) {
        double* yrow = yp + co * P;
        for (int64_t p = 0; p < P; ++p) yrow[p] = bp[co];
        for (int64_t ci = 0; ci < Ci; ++ci) {
            double w = wp[co * Ci + ci];
            if (w == 0.0) continue;
            const double* xrow = xp + ci * P;
            for (int64_t p = 0; p < P; ++p) yrow[p] += w * xrow[p];
        }
    }
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::add(NodeId a, NodeId b) { return add_scaled(a, b, 1.0, 1.0); }

NodeId Tape::add_scaled(NodeId a, NodeId b, double wa, double wb) {
    const Node& na = nodes_[a];
    const Node& nb = nodes_[b];
    if (na.n != nb.n || na.is_complex || nb.is_complex)
        throw std::invalid_argument("Tape::add_scaled: real same-size operands required");
    const bool ng = na.needs_grad || nb.needs_grad;
    std::vector<int64_t> shp = na.shape;
    Node& y = make(std::move(shp), false);
    y.kind = Node::Kind::add_scaled;
    y.p0 = a;
    y.p1 = b;
    y.d0 = wa;
    y.d1 = wb;
    y.needs_grad = ng;
    const double* ap = nodes_[a].pr;
    const double* bp = nodes_[b].pr;
    for (int64_t i = 0; i < y.n; ++i) y.vr[i] = wa * ap[i] + wb * bp[i];
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::scale_shift(NodeId x, double a, double c) {
    const Node& nx = nodes_[x];
    if (nx.is_complex)
        throw std::invalid_argument("Tape::scale_shift: real operand required");
    const bool ng = nx.needs_grad;
    std::vector<int64_t> shp = nx.shape;
    Node& y = make(std::move(shp), false);
    y.kind = Node::Kind::scale_shift;
    y.p0 = x;
    y.d0 = a;
    y.needs_grad = ng;
    const double* xp = nodes_[x].pr;
    for (int64_t i = 0; i < y.n; ++i) y.vr[i] = a * xp[i] + c;
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::mul_mask(NodeId x, std::span<const double> mask) {
    const Node& nx = nodes_[x];
    if (nx.shape.size() != 2 || nx.is_complex)
        throw std::invalid_argument("Tape::mul_mask: real (C,P) operand required");
    const int64_t C = nx.shape[0], P = nx.shape[1];
    if (static_cast<int64_t>(mask.size()) != P)
        throw std::invalid_argument("Tape::mul_mask: mask length mismatch");
    const bool ng = nx.needs_grad;
    std::vector<int64_t> shp = nx.shape;
    Node& y = make(std::move(shp), false);
    y.kind = Node::Kind::mul_mask;
    y.p0 = x;
    y.aux = mask;
    y.needs_grad = ng;
    const double* xp = nodes_[x].pr;
    for (int64_t c = 0; c < C; ++c)
        for (int64_t p = 0; p < P; ++p) y.vr[c * P + p] = xp[c * P + p] * mask[p];
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::activation(NodeId x, Activation act) {
    const Node& nx = nodes_[x];
    if (nx.is_complex)
        throw std::invalid_argument("Tape::activation: real operand required");
    if (act == Activation::identity) return x;
    const bool ng = nx.needs_grad;
    std::vector<int64_t> shp = nx.shape;
    Node& y = make(std::move(shp), false);
    y.kind = Node::Kind::act;
    y.p0 = x;
    y.activation = act;
    y.needs_grad = ng;
    const double* xp = nodes_[x].pr;
    y.cache.resize(static_cast<size_t>(y.n));
    for (int64_t i = 0; i < y.n; ++i) {
        double v = xp[i];
        double inner = kGeluC0 * (v + kGeluC1 * v * v * v);
        double t = std::tanh(inner);
        y.vr[i] = 0.5 * v * (1.0 + t);
        double dinner = kGeluC0 * (1.0 + 3.0 * kGeluC1 * v * v);
        y.cache[i] = 0.5 * (1.0 + t) + 0.5 * v * (1.0 - t * t) * dinner;
    }
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::rfft_nd(NodeId x, int n0, int n1) {
    const Node& nx = nodes_[x];
    if (nx.shape.size() != 2 || nx.is_complex)
        throw std::invalid_argument("Tape::rfft_nd: real (C,P) operand required");
    const int64_t C = nx.shape[0], P = nx.shape[1];
    const bool two_d = n1 > 0;
    const int64_t spatial = two_d ? static_cast<int64_t>(n0) * n1 : n0;
    if (P != spatial) throw std::invalid_argument("Tape::rfft_nd: shape mismatch");
    const int64_t Pk = two_d ? static_cast<int64_t>(n0) * (n1 / 2 + 1) : n0 / 2 + 1;
    const bool ng = nx.needs_grad;
    Node& y = make({C, Pk}, true);
    y.kind = Node::Kind::rfft;
    y.p0 = x;
    y.i0 = n0;
    y.i1 = n1;
    y.needs_grad = ng;
    const double* xp = nodes_[x].pr;
    for (int64_t c = 0; c < C; ++c) {
        if (two_d)
            fft::rfft2(xp + c * P, n0, n1, y.vc.data() + c * Pk);
        else
            fft::rfft(xp + c * P, n0, y.vc.data() + c * Pk);
    }
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::irfft_nd(NodeId z, int n0, int n1) {
    const Node& nz = nodes_[z];
    if (nz.shape.size() != 2 || !nz.is_complex)
        throw std::invalid_argument("Tape::irfft_nd: complex (C,Pk) operand required");
    const int64_t C = nz.shape[0], Pk = nz.shape[1];
    const bool two_d = n1 > 0;
    const int64_t expect = two_d ? static_cast<int64_t>(n0) * (n1 / 2 + 1) : n0 / 2 + 1;
    if (Pk != expect) throw std::invalid_argument("Tape::irfft_nd: shape mismatch");
    const int64_t P = two_d ? static_cast<int64_t>(n0) * n1 : n0;
    const bool ng = nz.needs_grad;
    Node& y = make({C, P}, false);
    y.kind = Node::Kind::irfft;
    y.p0 = z;
    y.i0 = n0;
    y.i1 = n1;
    y.needs_grad = ng;
    const cplx* zp = nodes_[z].pc;
    for (int64_t c = 0; c < C; ++c) {
        if (two_d)
            fft::irfft2(zp + c * Pk, n0, n1, y.vr.data() + c * P);
        else
            fft::irfft(zp + c * Pk, n0, y.vr.data() + c * P);
    }
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::spectral_gather(NodeId z, const ModeSet& modes) {
    const Node& nz = nodes_[z];
    if (!nz.is_complex || nz.shape.size() != 2)
        throw std::invalid_argument("Tape::spectral_gather: complex (C,Pk) required");
    const int64_t C = nz.shape[0], Pk = nz.shape[1];
    const int64_t K = modes.count();
    for (int bin : modes.bins)
        if (bin < 0 || bin >= Pk)
            throw std::invalid_argument("Tape::spectral_gather: mode beyond Nyquist");
    const bool ng = nz.needs_grad;
    Node& y = make({K, C}, true);
    y.kind = Node::Kind::gather;
    y.p0 = z;
    y.modes = &modes;
    y.needs_grad = ng;
    const cplx* zp = nodes_[z].pc;
    for (int64_t k = 0; k < K; ++k)
        for (int64_t c = 0; c < C; ++c)
            y.vc[k * C + c] = zp[c * Pk + modes.bins[k]];
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::mode_matmul(NodeId zg, NodeId R) {
    const Node& nz = nodes_[zg];
    const Node& nr = nodes_[R];
    if (!nz.is_complex || !nr.is_complex || nz.shape.size() != 2 ||
        nr.shape.size() != 3)
        throw std::invalid_argument("Tape::mode_matmul: bad operands");
    const int64_t K = nz.shape[0], Ci = nz.shape[1];
    const int64_t Co = nr.shape[1];
    if (nr.shape[0] != K || nr.shape[2] != Ci)
        throw std::invalid_argument("Tape::mode_matmul: shape mismatch");
    const bool ng = nz.needs_grad || nr.needs_grad;
    Node& y = make({K, Co}, true);
    y.kind = Node::Kind::modemul;
    y.p0 = zg;
    y.p1 = R;
    y.needs_grad = ng;
    const cplx* zp = nodes_[zg].pc;
    const cplx* rp = nodes_[R].pc;
    for (int64_t k = 0; k < K; ++k) {
        const cplx* zrow = zp + k * Ci;
        const cplx* rk = rp + k * Co * Ci;
        cplx* yrow = y.vc.data() + k * Co;
        for (int64_t co = 0; co < Co; ++co) {
            cplx acc(0.0, 0.0);
            const cplx* rrow = rk + co * Ci;
            for (int64_t ci = 0; ci < Ci; ++ci) acc += rrow[ci] * zrow[ci];
            yrow[co] = acc;
        }
    }
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::spectral_scatter(NodeId y_in, const ModeSet& modes) {
    const Node& ny = nodes_[y_in];
    if (!ny.is_complex || ny.shape.size() != 2)
        throw std::invalid_argument("Tape::spectral_scatter: complex (K,C) required");
    const int64_t K = ny.shape[0], C = ny.shape[1];
    if (K != modes.count())
        throw std::invalid_argument("Tape::spectral_scatter: mode count mismatch");
    const int64_t Pk = modes.dims == 2
                           ? static_cast<int64_t>(modes.n0) * (modes.n1 / 2 + 1)
                           : modes.n0 / 2 + 1;
    const bool ng = ny.needs_grad;
    Node& out = make({C, Pk}, true);
    out.kind = Node::Kind::scatter;
    out.p0 = y_in;
    out.modes = &modes;
    out.needs_grad = ng;
    const cplx* yp = nodes_[y_in].pc;
    for (int64_t k = 0; k < K; ++k)
        for (int64_t c = 0; c < C; ++c)
            out.vc[c * Pk + modes.bins[k]] = yp[k * C + c];
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::embed_interior(NodeId x, int n0, int n1) {
    const Node& nx = nodes_[x];
    if (nx.is_complex || nx.shape.size() != 2 ||
        nx.shape[1] != static_cast<int64_t>(n0) * n1)
        throw std::invalid_argument("Tape::embed_interior: (C, n0*n1) required");
    const int64_t C = nx.shape[0];
    const int64_t m0 = n0 + 2, m1 = n1 + 2;
    const bool ng = nx.needs_grad;
    Node& y = make({C, m0 * m1}, false);
    y.kind = Node::Kind::embed;
    y.p0 = x;
    y.i0 = n0;
    y.i1 = n1;
    y.needs_grad = ng;
    const double* xp = nodes_[x].pr;
    for (int64_t c = 0; c < C; ++c)
        for (int64_t iy = 0; iy < n0; ++iy)
            for (int64_t ix = 0; ix < n1; ++ix)
                y.vr[c * m0 * m1 + (iy + 1) * m1 + (ix + 1)] =
                    xp[c * n0 * n1 + iy * n1 + ix];
    return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::rel_l2(NodeId pred, std::span<const double> truth) {
    const Node& np = nodes_[pred];
    if (np.is_complex) throw std::invalid_argument("Tape::rel_l2: real operand");
    if (static_cast<int64_t>(truth.size()) != np.n)
        throw std::invalid_argument("Tape::rel_l2: shape mismatch");
    double dn = 0.0, tn = 0.0;
    const double* pp = np.pr;
    for (int64_t i = 0; i < np.n; ++i) {
        double d = pp[i] - truth[i];
        dn += d * d;
        tn += truth[i] * truth[i];
    }
    dn = std::sqrt(dn);
    tn = std::sqrt(tn);
    if (tn == 0.0) throw std::invalid_argument("Tape::rel_l2: zero-norm truth");
    const bool ng = np.needs_grad;
    Node& y = make({1}, false);
    y.kind = Node::Kind::rel_l2;
    y.p0 = pred;
    y.aux = truth;
    y.needs_grad = ng;
    y.vr[0] = dn / tn;
    y.cache = {dn, tn};
    return static_cast<NodeId>(nodes_.size() - 1);
}

double vino_energy_value(const VinoQuad& quad, std::span<const double> u) {
    const int64_t P = static_cast<int64_t>(quad.n0) * quad.n1;
    if (static_cast<int64_t>(u.size()) != P)
        throw std::invalid_argument("vino_energy_value: nodal field mismatch");
    if (static_cast<int64_t>(quad.f_nodal.size()) != P ||
        static_cast<int64_t>(quad.a_elem.size()) !=
            static_cast<int64_t>(quad.n0 - 1) * (quad.n1 - 1))
        throw std::invalid_argument("vino_energy_value: quad data mismatch");
    const ElemMat K = element_stiffness(quad.half_x, quad.half_y);
    const ElemMat M = element_mass(quad.half_x, quad.half_y);
    const int n1 = quad.n1;
    double energy = 0.0;
    for (int ey = 0; ey + 1 < quad.n0; ++ey)
        for (int ex = 0; ex + 1 < n1; ++ex) {
            int idx[4] = {ey * n1 + ex, ey * n1 + ex + 1, (ey + 1) * n1 + ex + 1,
                          (ey + 1) * n1 + ex};
            double a = quad.a_elem[ey * (n1 - 1) + ex];
            double uv[4], fv[4];
            for (int p = 0; p < 4; ++p) {
                uv[p] = u[idx[p]];
                fv[p] = quad.f_nodal[idx[p]];
            }
            for (int p = 0; p < 4; ++p) {
                double ku = 0.0, mf = 0.0;
                for (int q = 0; q < 4; ++q) {
                    ku += K[p][q] * uv[q];
                    mf += M[p][q] * fv[q];
                }
                energy += 0.5 * a * uv[p] * ku - mf * uv[p];
            }
        }
    return energy;
}

NodeId Tape::vino_energy(NodeId pred, const VinoQuad& quad) {
    const Node& np = nodes_[pred];
    const int64_t P = static_cast<int64_t>(quad.n0) * quad.n1;
    if (np.is_complex || np.n != P)
        throw std::invalid_argument("Tape::vino_energy: nodal field mismatch");
    double energy = vino_energy_value(quad, {np.pr, static_cast<size_t>(np.n)});
    const bool ng = np.needs_grad;
    Node& y = make({1}, false);
    y.kind = Node::Kind::vino;
    y.p0 = pred;
    y.quad = &quad;
    y.needs_grad = ng;
    y.vr[0] = energy;
    return static_cast<NodeId>(nodes_.size() - 1);
}

void Tape::backward(NodeId loss) {
    Node& ln = nodes_[loss];
    if (ln.is_complex || ln.n != 1)
        throw std::invalid_argument("Tape::backward: scalar real loss required");

    // Allocate zeroed gradient buffers for interior nodes; parameter leaves
    // keep their external accumulators.
    for (Node& nd : nodes_) {
        if (!nd.needs_grad) continue;
        if (nd.kind == Node::Kind::leaf) continue;
        if (nd.is_complex) {
            nd.gc_own.assign(static_cast<size_t>(nd.n), cplx(0.0, 0.0));
            nd.gc = nd.gc_own.data();
        } else {
            nd.gr_own.assign(static_cast<size_t>(nd.n), 0.0);
            nd.gr = nd.gr_own.data();
        }
    }
    if (!ln.needs_grad) return;  // no parameters reachable
    ln.gr[0] = 1.0;

    std::vector<double> tmp_r;
    std::vector<cplx> tmp_c;
    for (int id = static_cast<int>(nodes_.size()) - 1; id >= 0; --id) {
        Node& nd = nodes_[id];
        if (!nd.needs_grad || nd.kind == Node::Kind::leaf) continue;
        switch (nd.kind) {
            case Node::Kind::leaf:
                break;
            case Node::Kind::affine: {
                Node& nx = nodes_[nd.p0];
                Node& nw = nodes_[nd.p1];
                Node& nb = nodes_[nd.p2];
                const int64_t Ci = nx.shape[0], P = nx.shape[1];
                const int64_t Co = nw.shape[0];
                const double* g = nd.gr;
                if (nx.needs_grad) {
                    const double* wp = nw.pr;
                    for (int64_t ci = 0; ci < Ci; ++ci) {
                        double* gx = nx.gr + ci * P;
                        for (int64_t co = 0; co < Co; ++co) {
                            double w = wp[co * Ci + ci];
                            if (w == 0.0) continue;
                            const double* grow = g + co * P;
                            for (int64_t p = 0; p < P; ++p) gx[p] += w * grow[p];
                        }
                    }
                }
                if (nw.needs_grad) {
                    const double* xp = nx.pr;
                    for (int64_t co = 0; co < Co; ++co) {
                        const double* grow = g + co * P;
                        for (int64_t ci = 0; ci < Ci; ++ci) {
                            const double* xrow = xp + ci * P;
                            double acc = 0.0;
                            for (int64_t p = 0; p < P; ++p) acc += grow[p] * xrow[p];
                            nw.gr[co * Ci + ci] += acc;
                        }
                    }
                }
                if (nb.needs_grad) {
                    for (int64_t co = 0; co < Co; ++co) {
                        const double* grow = g + co * P;
                        double acc = 0.0;
                        for (int64_t p = 0; p < P; ++p) acc += grow[p];
                        nb.gr[co] += acc;
                    }
                }
                break;
            }
            case Node::Kind::add_scaled: {
                Node& na = nodes_[nd.p0];
                Node& nb = nodes_[nd.p1];
                if (na.needs_grad)
                    for (int64_t i = 0; i < nd.n; ++i) na.gr[i] += nd.d0 * nd.gr[i];
                if (nb.needs_grad)
                    for (int64_t i = 0; i < nd.n; ++i) nb.gr[i] += nd.d1 * nd.gr[i];
                break;
            }
            case Node::Kind::scale_shift: {
                Node& nx = nodes_[nd.p0];
                if (nx.needs_grad)
                    for (int64_t i = 0; i < nd.n; ++i) nx.gr[i] += nd.d0 * nd.gr[i];
                break;
            }
            case Node::Kind::mul_mask: {
                Node& nx = nodes_[nd.p0];
                if (nx.needs_grad) {
                    const int64_t C = nd.shape[0], P = nd.shape[1];
                    for (int64_t c = 0; c < C; ++c)
                        for (int64_t p = 0; p < P; ++p)
                            nx.gr[c * P + p] += nd.aux[p] * nd.gr[c * P + p];
                }
                break;
            }
            case Node::Kind::act: {
                Node& nx = nodes_[nd.p0];
                if (nx.needs_grad)
                    for (int64_t i = 0; i < nd.n; ++i)
                        nx.gr[i] += nd.cache[i] * nd.gr[i];
                break;
            }
            case Node::Kind::rfft: {
                Node& nx = nodes_[nd.p0];
                if (!nx.needs_grad) break;
                const int64_t C = nx.shape[0], P = nx.shape[1];
                const int64_t Pk = nd.shape[1];
                tmp_r.resize(static_cast<size_t>(P));
                for (int64_t c = 0; c < C; ++c) {
                    if (nd.i1 > 0)
                        fft::rfft2_adjoint(nd.gc + c * Pk, nd.i0, nd.i1, tmp_r.data());
                    else
                        fft::rfft_adjoint(nd.gc + c * Pk, nd.i0, tmp_r.data());
                    for (int64_t p = 0; p < P; ++p) nx.gr[c * P + p] += tmp_r[p];
                }
                break;
            }
            case Node::Kind::irfft: {
                Node& nz = nodes_[nd.p0];
                if (!nz.needs_grad) break;
                const int64_t C = nz.shape[0], Pk = nz.shape[1];
                const int64_t P = nd.shape[1];
                tmp_c.resize(static_cast<size_t>(Pk));
                for (int64_t c = 0; c < C; ++c) {
                    if (nd.i1 > 0)
                        fft::irfft2_adjoint(nd.gr + c * P, nd.i0, nd.i1, tmp_c.data());
                    else
                        fft::irfft_adjoint(nd.gr + c * P, nd.i0, tmp_c.data());
                    for (int64_t k = 0; k < Pk; ++k) nz.gc[c * Pk + k] += tmp_c[k];
                }
                break;
            }
            case Node::Kind::gather: {
                Node& nz = nodes_[nd.p0];
                if (!nz.needs_grad) break;
                const int64_t C = nd.shape[1];
                const int64_t Pk = nz.shape[1];
                const int64_t K = nd.shape[0];
                for (int64_t k = 0; k < K; ++k)
                    for (int64_t c = 0; c < C; ++c)
                        nz.gc[c * Pk + nd.modes->bins[k]] += nd.gc[k * C + c];
                break;
            }
            case Node::Kind::modemul: {
                Node& nz = nodes_[nd.p0];
                Node& nr = nodes_[nd.p1];
                const int64_t K = nd.shape[0], Co = nd.shape[1];
                const int64_t Ci = nz.shape[1];
                const cplx* zp = nz.pc;
                const cplx* rp = nr.pc;
                for (int64_t k = 0; k < K; ++k) {
                    const cplx* grow = nd.gc + k * Co;
                    const cplx* zrow = zp + k * Ci;
                    const cplx* rk = rp + k * Co * Ci;
                    for (int64_t co = 0; co < Co; ++co) {
                        cplx gy = grow[co];
                        if (gy == cplx(0.0, 0.0)) continue;
                        const cplx* rrow = rk + co * Ci;
                        if (nz.needs_grad) {
                            cplx* gz = nz.gc + k * Ci;
                            for (int64_t ci = 0; ci < Ci; ++ci)
                                gz[ci] += std::conj(rrow[ci]) * gy;
                        }
                        if (nr.needs_grad) {
                            cplx* gr = nr.gc + k * Co * Ci + co * Ci;
                            for (int64_t ci = 0; ci < Ci; ++ci)
                                gr[ci] += gy * std::conj(zrow[ci]);
                        }
                    }
                }
                break;
            }
            case Node::Kind::scatter: {
                Node& ny = nodes_[nd.p0];
                if (!ny.needs_grad) break;
                const int64_t C = nd.shape[0], Pk = nd.shape[1];
                const int64_t K = ny.shape[0];
                for (int64_t k = 0; k < K; ++k)
                    for (int64_t c = 0; c < C; ++c)
                        ny.gc[k * C + c] += nd.gc[c * Pk + nd.modes->bins[k]];
                break;
            }
            case Node::Kind::embed: {
                Node& nx = nodes_[nd.p0];
                if (!nx.needs_grad) break;
                const int64_t C = nx.shape[0];
                const int64_t n0 = nd.i0, n1 = nd.i1;
                const int64_t m0 = n0 + 2, m1 = n1 + 2;
                for (int64_t c = 0; c < C; ++c)
                    for (int64_t iy = 0; iy < n0; ++iy)
                        for (int64_t ix = 0; ix < n1; ++ix)
                            nx.gr[c * n0 * n1 + iy * n1 + ix] +=
                                nd.gr[c * m0 * m1 + (iy + 1) * m1 + (ix + 1)];
                break;
            }
            case Node::Kind::rel_l2: {
                Node& np = nodes_[nd.p0];
                if (!np.needs_grad) break;
                double dn = nd.cache[0], tn = nd.cache[1];
                if (dn == 0.0) break;
                double scale = nd.gr[0] / (dn * tn);
                const double* pp = np.pr;
                for (int64_t i = 0; i < np.n; ++i)
                    np.gr[i] += scale * (pp[i] - nd.aux[i]);
                break;
            }
            case Node::Kind::vino: {
                Node& np = nodes_[nd.p0];
                if (!np.needs_grad) break;
                const VinoQuad& q = *nd.quad;
                const ElemMat K = element_stiffness(q.half_x, q.half_y);
                const ElemMat M = element_mass(q.half_x, q.half_y);
                const double* up = np.pr;
                const int n1 = q.n1;
                const double g = nd.gr[0];
                for (int ey = 0; ey + 1 < q.n0; ++ey)
                    for (int ex = 0; ex + 1 < n1; ++ex) {
                        int idx[4] = {ey * n1 + ex, ey * n1 + ex + 1,
                                      (ey + 1) * n1 + ex + 1, (ey + 1) * n1 + ex};
                        double a = q.a_elem[ey * (n1 - 1) + ex];
                        for (int p = 0; p < 4; ++p) {
                            double acc = 0.0;
                            for (int qq = 0; qq < 4; ++qq)
                                acc += a * K[p][qq] * up[idx[qq]] -
                                       M[p][qq] * q.f_nodal[idx[qq]];
                            np.gr[idx[p]] += g * acc;
                        }
                    }
                break;
            }
        }
    }
}

std::span<const double> Tape::value(NodeId id) const {
    const Node& nd = nodes_[id];
    if (nd.is_complex) throw std::invalid_argument("Tape::value: complex node");
    return {nd.pr, static_cast<size_t>(nd.n)};
}

std::span<const cplx> Tape::cvalue(NodeId id) const {
    const Node& nd = nodes_[id];
    if (!nd.is_complex) throw std::invalid_argument("Tape::cvalue: real node");
    return {nd.pc, static_cast<size_t>(nd.n)};
}

std::span<const double> Tape::grad(NodeId id) const {
    const Node& nd = nodes_[id];
    if (nd.is_complex || nd.gr == nullptr)
        throw std::invalid_argument("Tape::grad: no real gradient");
    return {nd.gr, static_cast<size_t>(nd.n)};
}

double Tape::scalar(NodeId id) const {
    const Node& nd = nodes_[id];
    if (nd.is_complex || nd.n != 1)
        throw std::invalid_argument("Tape::scalar: not a scalar");
    return nd.pr[0];
}

const std::vector<int64_t>& Tape::shape(NodeId id) const {
    return nodes_[id].shape;
}

}  // namespace nows::ad
