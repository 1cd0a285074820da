use std::time::Duration;

/// What one training run produced.
#[derive(Clone, Debug)]
pub struct TrainReport {
    /// Mean train loss per epoch, in epoch order.
    pub epoch_losses: Vec<f64>,
    /// Final accuracy on the test split, in [0, 1].
    pub test_accuracy: f64,
    pub wall_time: Duration,
    pub seed: u64,
    /// Softmax temperature of the training loss.
    pub temperature: f64,
}

impl TrainReport {
    /// `epoch,loss` rows plus a summary line. Wall time is appended as a
    /// comment because it is the one field a bit-identical re-run will not
    /// reproduce.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,loss\n");
        for (epoch, loss) in self.epoch_losses.iter().enumerate() {
            out.push_str(&format!("{},{:.6}\n", epoch + 1, loss));
        }
        out.push_str(&format!(
            "summary,test_accuracy={:.6},seed={},temperature={}\n",
            self.test_accuracy, self.seed, self.temperature
        ));
        out.push_str(&format!("# wall_time_s={:.3}\n", self.wall_time.as_secs_f64()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_holds_epoch_rows_and_a_summary_line() {
        let report = TrainReport {
            epoch_losses: vec![0.5, 0.25],
            test_accuracy: 0.9875,
            wall_time: Duration::from_millis(1500),
            seed: 7,
            temperature: 30.0,
        };
        let csv = report.to_csv();
        assert!(csv.starts_with("epoch,loss\n1,0.500000\n2,0.250000\n"));
        assert!(csv.contains("summary,test_accuracy=0.987500,seed=7,temperature=30"));
    }
}
