#include "csma/des.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <queue>
#include <random>

#include "csma/csv.hpp"

namespace csma {

void DesConfig::validate() const {
  require(sim_duration_s > 0.0, "sim_duration_s must be positive");
  require(rate_update_s > 0.0, "rate_update_s must be positive");
  timings.validate();
  table.validate();
  if (rate_mode == RateMode::Fixed) {
    require(fixed_rate_bps > 0.0 && fixed_rate_bps <= table.max_rate_bps(),
            "fixed rate must lie in (0, top table rate]");
  }
}

namespace {

// Two backoff expiries closer than this belong to the same slot.
constexpr double kSameSlot = 1e-9;
constexpr std::size_t kMaxQueuedEvents = 50'000'000;

enum class EventType { BackoffExpire, TxEnd, AckEnd, RateUpdate, ProgressCheck };

struct Event {
  double time;
  std::uint64_t seq;
  EventType type;
  int ap;
  std::uint64_t gen;
};

struct LaterFirst {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    return a.seq > b.seq;
  }
};

enum class Phase { Contending, Transmitting, AckWait };

// Interference bookkeeping of the frame an AP is currently sending.
struct Reception {
  double signal_mw = 0.0;
  double current_mw = 0.0;
  double max_mw = 0.0;
  double integral = 0.0;  // interference integrated over time
  double last_change = 0.0;
  double start = 0.0;
  bool collided = false;

  void advance(double now) {
    integral += current_mw * (now - last_change);
    last_change = now;
  }
};

struct ApState {
  Phase phase = Phase::Contending;
  int busy = 0;             // sensing neighbours currently occupying the channel
  double idle_since = 0.0;
  int backoff = 0;          // remaining slots
  int cw = 0;
  std::uint64_t gen = 0;
  double expiry = kInf;
  double rate_bps = 0.0;
  double frame_rate_bps = 0.0;  // rate of the frame in flight
  int user = -1;
  Reception rx;
  int active_slot = -1;     // index into the active-transmitter list
  double tx_time = 0.0;     // accumulated data-frame airtime
  double busy_time = 0.0;
  double sinr_sum = 0.0;
  std::int64_t successes = 0;
  std::int64_t attempts = 0;
  std::int64_t failures = 0;
};

class Simulator {
 public:
  Simulator(const Deployment& dep, const RadioConfig& cfg, const DesConfig& des)
      : dep_(dep), des_(des), t_(des.timings), rng_(des.rng_seed),
        n_aps_(dep.num_aps()), noise_mw_(noise_power_mw(cfg)) {
    const double tx_mw = cfg.tx_power_mw();
    rx_mw_.resize(dep.num_users() * n_aps_);
    for (std::size_t u = 0; u < dep.num_users(); ++u) {
      for (std::size_t z = 0; z < n_aps_; ++z) rx_mw_[u * n_aps_ + z] = tx_mw * dep.user_ap_gain(u, z);
    }
    aps_.resize(n_aps_);
    for (std::size_t a = 0; a < n_aps_; ++a) {
      ApState& s = aps_[a];
      s.user = dep.served_user[a];
      s.cw = t_.cw_min;
      s.rate_bps = initial_rate(a);
    }
  }

  DesResult run() {
    for (std::size_t a = 0; a < n_aps_; ++a) {
      aps_[a].backoff = draw_backoff(aps_[a].cw);
      schedule_expiry(static_cast<int>(a));
    }
    if (des_.rate_mode == RateMode::Adaptive) push(des_.rate_update_s, EventType::RateUpdate, -1, 0);
    push(1.0, EventType::ProgressCheck, -1, 0);

    while (!queue_.empty()) {
      const Event ev = queue_.top();
      if (ev.time > des_.sim_duration_s) break;
      queue_.pop();
      now_ = ev.time;
      switch (ev.type) {
        case EventType::BackoffExpire:
          if (ev.gen == aps_[ev.ap].gen) start_tx(ev.ap);
          break;
        case EventType::TxEnd: end_tx(ev.ap); break;
        case EventType::AckEnd: end_ack(ev.ap); break;
        case EventType::RateUpdate:
          update_rates();
          push(now_ + des_.rate_update_s, EventType::RateUpdate, -1, 0);
          break;
        case EventType::ProgressCheck:
          if (tx_count_ == tx_count_at_check_)
            throw DesFailure("no transmission started within one simulated second");
          tx_count_at_check_ = tx_count_;
          push(now_ + 1.0, EventType::ProgressCheck, -1, 0);
          break;
      }
    }
    return collect();
  }

 private:
  double rx(int user, std::size_t ap) const {
    return rx_mw_[static_cast<std::size_t>(user) * n_aps_ + ap];
  }

  double usable_rate(double sinr_lin) const {
    const double r = rate_of_sinr(linear_to_db(sinr_lin), des_.table);
    // A saturated AP always sends; without a usable rate it falls back to the lowest.
    return r > 0.0 ? r : des_.table.min_rate_bps();
  }

  double initial_rate(std::size_t ap) const {
    if (des_.rate_mode == RateMode::Fixed) return des_.fixed_rate_bps;
    const int u = aps_[ap].user;
    // APs without a user transmit to an error-free phantom receiver.
    if (u < 0) return des_.table.max_rate_bps();
    return usable_rate(rx(u, ap) / noise_mw_);
  }

  void update_rates() {
    for (std::size_t x = 0; x < n_aps_; ++x) {
      const int u = aps_[x].user;
      if (u < 0) continue;
      double interference = 0.0;
      for (std::size_t z = 0; z < n_aps_; ++z) {
        if (z == x || dep_.senses(x, z)) continue;
        interference += rx(u, z) * (aps_[z].tx_time / now_);
      }
      aps_[x].rate_bps = usable_rate(rx(u, x) / (interference + noise_mw_));
    }
  }

  int draw_backoff(int cw) { return std::uniform_int_distribution<int>(0, cw)(rng_); }

  void push(double time, EventType type, int ap, std::uint64_t gen) {
    if (queue_.size() >= kMaxQueuedEvents) throw DesFailure("event queue overflow");
    queue_.push(Event{time, seq_++, type, ap, gen});
  }

  void schedule_expiry(int ap) {
    ApState& s = aps_[ap];
    s.expiry = s.idle_since + t_.difs_s + s.backoff * t_.sigma_s;
    push(s.expiry, EventType::BackoffExpire, ap, ++s.gen);
  }

  void on_busy(int ap) {
    ApState& s = aps_[ap];
    if (s.phase != Phase::Contending || s.expiry == kInf) return;
    // Expiring in this very slot: the AP transmits too and the frames collide.
    if (s.expiry <= now_ + kSameSlot) return;
    const double counted = now_ - s.idle_since - t_.difs_s;
    if (counted > 0.0) {
      const int consumed = static_cast<int>(std::floor(counted / t_.sigma_s + 1e-9));
      s.backoff = std::max(0, s.backoff - consumed);
    }
    s.expiry = kInf;
    ++s.gen;
  }

  void on_idle(int ap) {
    ApState& s = aps_[ap];
    if (s.phase != Phase::Contending) return;
    s.idle_since = now_;
    schedule_expiry(ap);
  }

  void occupy(int ap) {
    for (int y : dep_.sensing_neighbors[ap]) {
      if (++aps_[y].busy == 1) on_busy(y);
    }
  }

  void release(int ap) {
    for (int y : dep_.sensing_neighbors[ap]) {
      if (--aps_[y].busy == 0) on_idle(y);
    }
  }

  void begin_contention(int ap) {
    ApState& s = aps_[ap];
    s.phase = Phase::Contending;
    s.backoff = draw_backoff(s.cw);
    s.expiry = kInf;
    ++s.gen;
    if (s.busy == 0) {
      s.idle_since = now_;
      schedule_expiry(ap);
    }
  }

  void trace(int ap, TraceKind kind) {
    if (des_.record_trace) trace_.push_back({now_, ap, kind});
  }

  void start_tx(int x) {
    ApState& s = aps_[x];
    s.phase = Phase::Transmitting;
    s.expiry = kInf;
    ++s.gen;
    ++s.attempts;
    ++tx_count_;
    s.frame_rate_bps = s.rate_bps;
    trace(x, TraceKind::TxStart);

    Reception& mine = s.rx;
    mine = Reception{};
    mine.start = now_;
    mine.last_change = now_;
    for (int z : active_) {
      if (dep_.senses(x, z)) mine.collided = true;
      if (s.user >= 0) mine.current_mw += rx(s.user, static_cast<std::size_t>(z));
    }
    if (s.user >= 0) mine.signal_mw = rx(s.user, static_cast<std::size_t>(x));
    mine.max_mw = mine.current_mw;
    for (int y : active_) {
      ApState& other = aps_[y];
      Reception& r = other.rx;
      if (dep_.senses(y, x)) r.collided = true;
      if (other.user < 0) continue;
      r.advance(now_);
      r.current_mw += rx(other.user, static_cast<std::size_t>(x));
      r.max_mw = std::max(r.max_mw, r.current_mw);
    }
    s.active_slot = static_cast<int>(active_.size());
    active_.push_back(x);

    occupy(x);
    push(now_ + frame_duration(s.frame_rate_bps, t_), EventType::TxEnd, x, 0);
  }

  void end_tx(int x) {
    ApState& s = aps_[x];
    const int slot = s.active_slot;
    active_[slot] = active_.back();
    aps_[active_[slot]].active_slot = slot;
    active_.pop_back();
    s.active_slot = -1;
    for (int y : active_) {
      ApState& other = aps_[y];
      if (other.user < 0) continue;
      Reception& r = other.rx;
      r.advance(now_);
      r.current_mw = std::max(0.0, r.current_mw - rx(other.user, static_cast<std::size_t>(x)));
    }

    const double frame = frame_duration(s.frame_rate_bps, t_);
    s.tx_time += frame;
    trace(x, TraceKind::TxEnd);

    // The phantom receiver of a userless AP only suffers in-range collisions.
    bool success = !s.rx.collided;
    if (s.user >= 0) {
      Reception& r = s.rx;
      r.advance(now_);
      const double worst_sinr = r.signal_mw / (r.max_mw + noise_mw_);
      const double needed = inv_rate(s.frame_rate_bps, des_.table);
      success = success && linear_to_db(worst_sinr) >= needed;
      if (success) {
        const double mean_i = r.integral / (now_ - r.start);
        s.sinr_sum += r.signal_mw / (mean_i + noise_mw_);
        ++s.successes;
      }
    }

    if (success) {
      s.phase = Phase::AckWait;
      const double ack = t_.sifs_s + t_.ack_duration_s();
      push(now_ + ack, EventType::AckEnd, x, 0);
      return;
    }
    ++s.failures;
    trace(x, TraceKind::Collision);
    s.cw = std::min(2 * (s.cw + 1) - 1, t_.cw_max);
    release(x);
    begin_contention(x);
  }

  void end_ack(int x) {
    ApState& s = aps_[x];
    trace(x, TraceKind::Ack);
    s.busy_time += frame_duration(s.frame_rate_bps, t_) + t_.sifs_s + t_.ack_duration_s();
    s.cw = t_.cw_min;
    release(x);
    begin_contention(x);
  }

  DesResult collect() {
    DesResult out;
    out.busy_time_s.reserve(n_aps_);
    for (std::size_t a = 0; a < n_aps_; ++a) {
      const ApState& s = aps_[a];
      out.busy_time_s.push_back(s.busy_time);
      if (s.user < 0) continue;
      DesLinkStats st;
      st.ap_id = static_cast<int>(a);
      st.user_id = s.user;
      st.inner_flag = dep_.inner_mask[a];
      st.mean_rx_sinr_db =
          s.successes > 0 ? linear_to_db(s.sinr_sum / static_cast<double>(s.successes)) : -kInf;
      st.delivered_bits = s.successes * t_.msdu_bits;
      st.throughput_bps = static_cast<double>(st.delivered_bits) / des_.sim_duration_s;
      st.tx_attempts = s.attempts;
      st.collisions = s.failures;
      out.links.push_back(st);
    }
    out.trace = std::move(trace_);
    return out;
  }

  const Deployment& dep_;
  const DesConfig& des_;
  const FrameTimings& t_;
  std::mt19937_64 rng_;
  std::size_t n_aps_;
  double noise_mw_;
  std::vector<double> rx_mw_;  // user x AP received power
  std::vector<ApState> aps_;
  std::vector<int> active_;
  std::priority_queue<Event, std::vector<Event>, LaterFirst> queue_;
  std::uint64_t seq_ = 0;
  double now_ = 0.0;
  std::int64_t tx_count_ = 0;
  std::int64_t tx_count_at_check_ = 0;
  std::vector<TraceEvent> trace_;
};

}  // namespace

DesResult run_des(const Deployment& dep, const RadioConfig& cfg, const DesConfig& des) {
  cfg.validate();
  des.validate();
  require(dep.sensing_neighbors.size() == dep.num_aps(), "deployment sensing graph not built");
  require(dep.num_aps() > 0, "deployment has no APs");
  return Simulator(dep, cfg, des).run();
}

DesCurves des_ccdfs(std::span<const DesLinkStats> stats, std::vector<double> sinr_thresholds_db,
                    std::vector<double> throughput_thresholds_bps) {
  require(!stats.empty(), "no links to aggregate");
  std::vector<double> sinr;
  std::vector<double> tput;
  sinr.reserve(stats.size());
  tput.reserve(stats.size());
  for (const auto& s : stats) {
    sinr.push_back(s.delivered_bits > 0 ? s.mean_rx_sinr_db : -kInf);
    tput.push_back(s.throughput_bps);
  }
  return {empirical_ccdf(sinr, std::move(sinr_thresholds_db)),
          empirical_ccdf(tput, std::move(throughput_thresholds_bps))};
}

const char* to_string(TraceKind kind) {
  switch (kind) {
    case TraceKind::TxStart: return "tx_start";
    case TraceKind::TxEnd: return "tx_end";
    case TraceKind::Collision: return "collision";
    case TraceKind::Ack: return "ack";
  }
  return "unknown";
}

void write_trace_csv(const std::filesystem::path& path, std::span<const TraceEvent> trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "time_s,ap_id,event\n";
  for (const auto& e : trace) out << format_real(e.time_s) << ',' << e.ap_id << ',' << to_string(e.kind) << '\n';
}

}  // namespace csma
