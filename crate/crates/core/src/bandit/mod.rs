//! Arm-selection policies, regret accounting and delayed feedback.

mod delay;
mod regret;
mod sim;
mod state;

pub use delay::{delayed_feedback_buffer, DelayDistribution, DelaySpec, Delivery, FeedbackEvent};
pub use regret::{distributed_regret_step, effective_regret, ucb_regret_bound, RegretLedger};
pub use sim::{run_bernoulli_bandit, run_shortlisted_bandit, BanditPolicy, BanditRun};
pub use state::{
    belief_thompson_select, belief_ucb_select, thompson_select, ucb1_select, update_arm, BanditState, RewardModel, DEFAULT_OBS_VARIANCE,
    DEFAULT_UCB_C,
};
