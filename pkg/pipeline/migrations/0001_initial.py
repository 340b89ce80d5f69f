from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = []

    operations = [
        migrations.CreateModel(
            name='PipelineRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('output_dir', models.CharField(max_length=1024)),
                ('config', models.JSONField(default=dict, help_text='Validated pipeline configuration')),
                ('seed', models.BigIntegerField(blank=True, null=True)),
                ('status', models.CharField(choices=[('running', 'Running'), ('completed', 'Completed'), ('failed', 'Failed')], default='running', max_length=20)),
                ('failed_stage', models.CharField(blank=True, max_length=50)),
                ('error_message', models.TextField(blank=True)),
                ('completed_stages', models.JSONField(blank=True, default=list)),
                ('stage_hashes', models.JSONField(blank=True, default=dict, help_text='Per-stage sha256 of the artifacts written')),
                ('resumed', models.BooleanField(default=False)),
                ('started_at', models.DateTimeField(auto_now_add=True)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
            ],
            options={
                'ordering': ['-started_at', '-id'],
            },
        ),
    ]
