use std::fmt::Write;

use super::{join_list, join_pairs, AgentSection, Scenario};
use crate::composition::Encoder;

struct Out(String);

impl Out {
    fn section(&mut self, name: &str) {
        if !self.0.is_empty() {
            self.0.push('\n');
        }
        let _ = writeln!(self.0, "[{name}]");
    }

    fn kv(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.0, "{key} = {value}");
    }

    fn agent(&mut self, a: &AgentSection) {
        self.kv("rule", &a.rule);
        self.kv("actions", join_list(&a.actions));
        self.kv("factors", join_list(&a.factors));
        if let Some(n) = a.attention {
            self.kv("attention", n);
        }
        self.kv("action_attention", a.action_attention);
        if let Some(px) = &a.pixels {
            self.kv("pixels", join_list(px));
        }
        if let Some(f) = &a.focus {
            self.kv("focus", join_list(f));
        }
        self.kv("feeling", a.feeling.value());
        self.kv(
            "initial",
            join_pairs(a.initial.iter().map(|(k, v)| (k, v.get()))),
        );
        self.kv("selected", join_list(&a.selected));
        for (k, v) in &a.params.0 {
            self.kv(k, v);
        }
    }

    fn encoder(&mut self, key: &str, e: &Encoder) {
        self.kv(key, join_pairs(&e.0));
    }
}

pub(super) fn write_scenario(s: &Scenario) -> String {
    let mut o = Out(String::new());
    o.section("scenario");
    o.kv("id", &s.id);
    o.kv("seed", s.seed);
    o.kv("steps", s.steps);
    o.kv("t0", s.t0);

    if let Some(w) = &s.world {
        o.section("world");
        o.kv("kind", &w.kind);
        for (k, v) in &w.params.0 {
            o.kv(k, v);
        }
    }

    o.section("agent");
    o.agent(&s.agent);

    o.section("memory");
    o.kv("capacity", s.memory.capacity);
    o.kv("reliability", s.memory.reliability);
    o.kv("threshold", s.memory.activation);

    let m = &s.mindfulness;
    o.section("mindfulness");
    o.kv("enabled", m.enabled);
    if let Some(n) = m.strength {
        o.kv("strength", n);
    }
    o.kv("sharpness", m.sharpness);
    o.kv("right", m.right);
    o.kv("rho", m.rho);
    o.kv("equanimity_floor", m.equanimity_floor);
    o.kv("unwholesome", join_list(&m.unwholesome));
    o.kv("quote_focus", m.quote_focus);
    o.kv("start", s.schedule.start);
    if let Some(p) = s.schedule.period {
        o.kv("period", p);
    }

    if let Some(c) = &s.concentration {
        o.section("concentration");
        o.kv("start", c.start);
        o.kv("drift_rate", c.drift_rate);
        o.kv("recovery", c.recovery);
        o.kv("pixels", join_list(&c.pixels));
        o.kv("focus", join_list(&c.focus));
        o.kv("mental", join_list(&c.mental));
        o.kv("action", join_list(&c.action));
    }

    if let Some(r) = &s.reset {
        o.section("reset");
        o.kv("cycles", r.cycles);
        o.kv("coverage", r.coverage);
    }

    let m = &s.metrics;
    o.section("metrics");
    if let Some(w) = m.window {
        o.kv("window", w);
    }
    o.kv("track", join_list(&m.track));
    o.kv("self_concepts", join_list(&m.self_concepts));
    o.kv("classify", m.classify);
    o.kv("horizon", m.horizon);
    o.kv("rollouts", m.rollouts);
    o.kv("epsilon", m.epsilon);
    o.kv("tick_columns", m.tick_columns);

    if let Some(p) = &s.partner {
        o.section("partner");
        o.kv("seed", p.seed);
        o.encoder("host_to_partner", &p.host_to_partner);
        o.encoder("partner_to_host", &p.partner_to_host);
        o.agent(&p.agent);
    }
    o.0
}
