from django.db import models


class PipelineRun(models.Model):
    """Ledger entry for one pipeline run; manifest.json stays the checkpoint of record"""

    STATUS_CHOICES = [
        ('running', 'Running'),
        ('completed', 'Completed'),
        ('failed', 'Failed'),
    ]

    output_dir = models.CharField(max_length=1024)
    config = models.JSONField(default=dict, help_text="Validated pipeline configuration")
    seed = models.BigIntegerField(null=True, blank=True)
    status = models.CharField(max_length=20, choices=STATUS_CHOICES, default='running')
    failed_stage = models.CharField(max_length=50, blank=True)
    error_message = models.TextField(blank=True)

    completed_stages = models.JSONField(default=list, blank=True)
    stage_hashes = models.JSONField(default=dict, blank=True, help_text="Per-stage sha256 of the artifacts written")
    resumed = models.BooleanField(default=False)

    started_at = models.DateTimeField(auto_now_add=True)
    finished_at = models.DateTimeField(null=True, blank=True)

    class Meta:
        ordering = ['-started_at', '-id']

    def __str__(self):
        return f"Run {self.pk} ({self.get_status_display()}) -> {self.output_dir}"

    def mark_stage(self, stage, hashes):
        if stage not in self.completed_stages:
            self.completed_stages = [*self.completed_stages, stage]
        self.stage_hashes = {**self.stage_hashes, stage: hashes}
        self.save(update_fields=['completed_stages', 'stage_hashes'])
